"""Reference values produced by tests/oracle_gen.py (mpmath, 40 digits). Do not edit."""

# (a, b, c, x) -> (F, dF/da)
HYP2F1 = {
    (1, 1, 2, 0.5): (1.3862943611198906188, 0.48045301391820142467),
    (2, -3, 3, 0.5): (0.325, -0.24166666666666666667),
    (1.5, 0.5, 2.5, 0.95): (1.8262489839789268317, 1.1372033693283408116),
    (2, -3, 12, 0.9): (0.63545054945054944347, -0.15579395604395604631),
    (0.7, 1.3, 1.1, 0.3): (1.3456246634475191361, 0.56438458393775040488),
    (3, 2.5, 7, 0.97): (7.1499768917016356865, 6.7668701283393568342),
    (2, 0.5, 3, 0.999): (2.545305790236750284, 2.8699617723121153671),
    (0.25, -0.75, 1.25, 0.6): (0.90534895245628547314, -0.38283222139922907157),
}

# (theta, nu, x, k) -> (W0, W1)
W01 = {
    (2, 5, 0.3, 1): (0.25685800000000001472, 0.37844562550042984732),
    (2, 5, 0.3, 0): (0.16807000000000001333, 0.36905771565556551075),
    (1.5, 1, 0.45, 1): (0.48202130956123124714, 0.34329756235652616043),
    (1.5, 1, 0.45, 0): (0.5499999999999999889, 0.3086808213948918702),
    (0.5, 7, 0.6, 3): (0.41336519060011495277, 0.37384345382625739459),
    (5, 0, 0.8, 2): (0.074720242960575352505, 0.13275109881841369559),
    (3, 3, 0.5, 4): (0.125, 0.25993019270997949103),
    (1, 0.5, 0.9, 10): (0.10465589811174119937, 0.23599750332633189054),
}

# (theta, nu, k) -> alpha_k
ROOTS = {
    (2, 5, 1): 0.21639025572270852401,
    (2, 5, 2): 0.24997915675636934427,
    (1.5, 1, 1): 0.56883739553698553513,
    (0.5, 7, 1): 0.39915362470592418439,
    (5, 0, 1): 0.87086363025362817192,
    (5, 0.5, 1): 0.63483671863790593685,
    (1, 2, 3): 0.56617659583351424041,
    (2, 1, 5): 0.43679990712518238532,
}

# myopic rule, cutoffs from roots k <= 40 and alpha* beyond
WIN_MYOPIC_2_5_05 = 0.38518510116104131352
WIN_SINGLE_15_1_08_B04 = 0.3420257593077136314

# Poisson-prior roots, k -> root
POISSON_ROOTS = {
    1: 2.1198244098920636495,
    2: 3.6925363532223324698,
    3: 5.3519918315204033639,
    10: 17.301388765592755846,
}
