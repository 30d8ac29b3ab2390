"""Frozen reference values shared across the test suite.

Values in the ORACLE_* block were produced by tests/oracle_reference.py, an
independent scipy implementation of the same estimators and statistics;
regenerate and compare with

    python tests/oracle_reference.py

REFERENCE_LIMITS and REFERENCE_COVERAGE are the external benchmark numbers
for the half-line hazard case study, quoted to four decimals. The acceptance
suite holds the package to them at its stated tolerances.
"""

LEUKEMIA_Y = (1.0, 1.0, 2.0, 2.0, 3.0, 4.0, 4.0, 5.0, 5.0, 6.0, 8.0, 8.0,
              9.0, 10.0, 10.0, 12.0, 14.0, 16.0, 20.0, 24.0, 34.0)

LEVELS = (0.01, 0.025, 0.05, 0.1, 0.9, 0.95, 0.975, 0.99)

# full fit on the case-study data
PSI_HAT = 0.08726576313311138
LAM_HAT = 0.002273291936251647
LOGLIK_HAT = -67.87522647076268
OBSERVED_INFO = ((1905.755667835839, 13941.358254809253),
                 (13941.358254809253, 184928.61654853975))

# constrained fit and statistics at psi = 0.05
LAM_PSI_005 = 0.005520985073549501
PROFILE_005 = -68.57494282221096
R_005 = 1.1829762055496076
UBAR_005 = 1.590263080316044
UHAT_005 = 1.6197393872592138
RBAR_STAR_005 = 1.4330792839831776
RHAT_STAR_005 = 1.4486043657989396

# full-sample expected covariances at the full fit
I_HAT_EXPECTED = ((1908.539438864722, 13861.73026474867),
                  (13861.73026474867, 186939.89559871354))
Q_HAT_EXPECTED = (166.55015060217013, 1422.1389485127784)

# upper limits from the independent oracle, full precision
ORACLE_LIMITS = {
    "R": {0.01: 0.020632798544410594, 0.025: 0.029270129195268807,
          0.05: 0.03729427564738597, 0.1: 0.04719687393981531,
          0.9: 0.13292222767960188, 0.95: 0.14436706428519205,
          0.975: 0.15427687831831557, 0.99: 0.1660287586194296},
    "Rbar": {0.01: 0.026038911763590855, 0.025: 0.03529588017608608,
             0.05: 0.04389585189428834, 0.1: 0.054525791860177704,
             0.9: 0.13759333457242556, 0.95: 0.14723337804062975,
             0.975: 0.15604333616847443, 0.99: 0.1667891296864767},
    "Rhat": {0.01: 0.026275134164922973, 0.025: 0.03562212907212426,
             0.05: 0.04430110695255822, 0.1: 0.05502686573897552,
             0.9: 0.13791415987507977, 0.95: 0.14751733369637393,
             0.975: 0.15630175538338784, 0.99: 0.1670242591377238},
}

# benchmark upper limits for the case study, four decimals
REFERENCE_LIMITS = {
    "R": {0.01: 0.0206, 0.025: 0.0293, 0.05: 0.0373, 0.1: 0.0472,
          0.9: 0.1327, 0.95: 0.1441, 0.975: 0.1540, 0.99: 0.1657},
    "Rbar": {0.01: 0.0260, 0.025: 0.0353, 0.05: 0.0439, 0.1: 0.0545,
             0.9: 0.1372, 0.95: 0.1469, 0.975: 0.1557, 0.99: 0.1664},
    "Rhat": {0.01: 0.0263, 0.025: 0.0356, 0.05: 0.0443, 0.1: 0.0550,
             0.9: 0.1375, 0.95: 0.1472, 0.975: 0.1559, 0.99: 0.1667},
}

# benchmark coverage probabilities for the same study, n = 21 per replicate
REFERENCE_COVERAGE = {
    "R": {0.01: 0.0032, 0.025: 0.0150, 0.05: 0.0397, 0.1: 0.0745,
          0.9: 0.8840, 0.95: 0.9366, 0.975: 0.9661, 0.99: 0.9808},
    "Rbar": {0.01: 0.0125, 0.025: 0.0261, 0.05: 0.0526, 0.1: 0.1100,
             0.9: 0.8990, 0.95: 0.9467, 0.975: 0.9742, 0.99: 0.9900},
    "Rhat": {0.01: 0.0126, 0.025: 0.0264, 0.05: 0.0526, 0.1: 0.1102,
             0.9: 0.8991, 0.95: 0.9469, 0.975: 0.9748, 0.99: 0.9902},
}
