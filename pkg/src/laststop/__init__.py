"""Last-success stopping with a negative binomial number of trials.

Submodules: ``specialfn`` (hypergeometric kernel), ``fixedn`` (known number of
trials), ``model`` (prior and posterior laws), ``strategy`` (roots and cutoff
rules), ``winprob`` (exact winning probabilities), ``valuefn`` (optimal value
function), ``simulate`` (Monte Carlo) and ``cli``.
"""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # pragma: no cover - running from a source tree
    __version__ = "0.1.0"

from .model import ModelParams, State  # noqa: E402
from .strategy import CutoffProfile, StrategySpec, alpha_root, build_profile, myopic_strategy  # noqa: E402

__all__ = [
    "__version__",
    "ModelParams",
    "State",
    "CutoffProfile",
    "StrategySpec",
    "alpha_root",
    "build_profile",
    "myopic_strategy",
]
