"""Regenerate the frozen reference values in ``frozen.py`` with mpmath.

    python tests/oracle_gen.py > tests/frozen.py

Nothing here imports the package under test. mpmath is only needed to rerun
this script, not to run the tests.
"""
import mpmath as mp

mp.mp.dps = 40


def F(a, b, c, x):
    return mp.hyp2f1(a, b, c, x)


def dF(a, b, c, x):
    return mp.diff(lambda s: mp.hyp2f1(s, b, c, x), a)


def W(theta, nu, x, k):
    theta, nu, x = mp.mpf(theta), mp.mpf(nu), mp.mpf(x)
    a, b, c = theta, theta - nu, theta + k
    pw = (1 - x) ** theta
    return pw * F(a, b, c, x), -theta * pw * (mp.log(1 - x) * F(a, b, c, x) + dF(a, b, c, x))


def root(theta, nu, k, guess=(0.05, 0.95)):
    return mp.findroot(lambda x: W(theta, nu, x, k)[0] - W(theta, nu, x, k)[1], guess,
                       solver="anderson")


def nb_pmf(r, p_fail, j):
    # P(j) = (r)_j / j! (1 - p)^r p^j with p = p_fail
    return mp.rf(r, j) / mp.factorial(j) * (1 - p_fail) ** r * p_fail ** j


def win_v2(theta, nu, q, cutoffs, tail):
    """Time-domain winning probability of a monotone cutoff rule in high precision."""
    theta, nu, q = mp.mpf(theta), mp.mpf(nu), mp.mpf(q)

    def b(k):
        return cutoffs[k - 1] if k <= len(cutoffs) else tail

    def S1(t, k):
        return W(theta, nu, q * (1 - t), k)[1]

    def pNt(t, k):
        s = q * t / (1 - q + q * t)
        return nb_pmf(nu, s, k)

    total = mp.mpf(0)
    k = 0
    while True:
        bn = mp.mpf(b(k + 1))
        m = pNt(bn, k) if bn > 0 else (1 if k == 0 else 0)
        total += m * S1(bn, k)
        if k >= 1 and b(k) > b(k + 1):
            lo, hi = mp.mpf(b(k + 1)), mp.mpf(b(k))
            total += mp.quad(lambda t: S1(t, k) * pNt(t, k - 1) * (k + nu - 1) / (t + 1 / q - 1), [lo, hi])
        if k > len(cutoffs) + 2 and m < mp.mpf(10) ** -18:
            break
        k += 1
    return total


def poisson_root(k):
    def lhs(x):
        s = mp.mpf(1) / k
        j, term, harm = 0, mp.mpf(1), mp.mpf(0)
        while True:
            j += 1
            term *= x / j
            harm += mp.mpf(1) / (j + k - 1)
            add = term / (k + j) * (1 - harm)
            s += add
            if j > 10 and abs(add) < mp.mpf(10) ** -35:
                return s
    return mp.findroot(lambda x: lhs(x) * mp.exp(-x), (mp.mpf(k), mp.mpf(3 * k)), solver="anderson")


def main():
    out = []
    emit = out.append
    emit('"""Reference values produced by tests/oracle_gen.py (mpmath, 40 digits). Do not edit."""')
    emit("")
    emit("# (a, b, c, x) -> (F, dF/da)")
    emit("HYP2F1 = {")
    for args in [(1, 1, 2, 0.5), (2, -3, 3, 0.5), (1.5, 0.5, 2.5, 0.95), (2, -3, 12, 0.9),
                 (0.7, 1.3, 1.1, 0.3), (3, 2.5, 7, 0.97), (2, 0.5, 3, 0.999), (0.25, -0.75, 1.25, 0.6)]:
        emit(f"    {args!r}: ({mp.nstr(F(*args), 20)}, {mp.nstr(dF(*args), 20)}),")
    emit("}")
    emit("")
    emit("# (theta, nu, x, k) -> (W0, W1)")
    emit("W01 = {")
    for args in [(2, 5, 0.3, 1), (2, 5, 0.3, 0), (1.5, 1, 0.45, 1), (1.5, 1, 0.45, 0), (0.5, 7, 0.6, 3),
                 (5, 0, 0.8, 2), (3, 3, 0.5, 4), (1, 0.5, 0.9, 10)]:
        w = W(*args)
        emit(f"    {args!r}: ({mp.nstr(w[0], 20)}, {mp.nstr(w[1], 20)}),")
    emit("}")
    emit("")
    emit("# (theta, nu, k) -> alpha_k")
    emit("ROOTS = {")
    for args in [(2, 5, 1), (2, 5, 2), (1.5, 1, 1), (0.5, 7, 1), (5, 0, 1), (5, 0.5, 1), (1, 2, 3),
                 (2, 1, 5)]:
        emit(f"    {args!r}: {mp.nstr(root(*args), 20)},")
    emit("}")
    emit("")
    # myopic winning probability at (theta, nu, q) = (2, 5, 0.5)
    th, nu, q = 2, 5, 0.5
    roots = [root(th, nu, k) for k in range(1, 41)]
    a_star = 1 - mp.exp(-mp.mpf(1) / th)
    cut = [max(1 - r / q, 0) for r in roots]
    emit("# myopic rule, cutoffs from roots k <= 40 and alpha* beyond")
    emit(f"WIN_MYOPIC_2_5_05 = {mp.nstr(win_v2(th, nu, q, cut, max(1 - a_star / q, 0)), 20)}")
    emit(f"WIN_SINGLE_15_1_08_B04 = {mp.nstr(win_v2(1.5, 1, 0.8, [mp.mpf('0.4')], mp.mpf('0.4')), 20)}")
    emit("")
    emit("# Poisson-prior roots, k -> root")
    emit("POISSON_ROOTS = {")
    for k in (1, 2, 3, 10):
        emit(f"    {k}: {mp.nstr(poisson_root(k), 20)},")
    emit("}")
    print("\n".join(out))


if __name__ == "__main__":
    main()
