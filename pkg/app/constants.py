"""
File for storing constants used throughout the code
"""

# Merton log-jump support is truncated to gamma_j +/- TRUNCATION_SD * delta_j
TRUNCATION_SD = 8.0

QUAD_EPSREL = 1e-10
QUAD_LIMIT = 200

MEMM_MAX_ITER = 200
MEMM_TOLERANCE = 1e-10
MEMM_DRIFT_TOLERANCE = 1e-9
BRACKET_MAX_DOUBLINGS = 60

GAUSS_LEGENDRE_NODES = 64
GAMMA_INTEGRAL_TOLERANCE = 1e-12

HAMILTONIAN_MAX_ITER = 100
HAMILTONIAN_TOLERANCE = 1e-10
EXPONENT_CLAMP = 700.0
TAIL_TOLERANCE = 1e-6

SERIES_TAIL_WEIGHT = 1e-12
SERIES_MAX_TERMS = 500
SERIES_REL_TOLERANCE = 1e-10

RICHARDSON_DEPTH = 3
# relative agreement of extrapolated differences with the closed-form greek, by order
FD_GREEK_TOLERANCES = {1: 1e-6, 2: 1e-6, 3: 1e-6, 4: 1e-5, 5: 1e-4, 6: 1e-4}
MC_BATCH_SIZE = 50_000
MIN_MC_PATHS = 10_000

CSV_FLOAT_FORMAT = "%.12g"

# Reference configuration
REFERENCE_MERTON = {"sigma": 0.2, "lambda_m": 5.0, "gamma_j": -0.05, "delta_j": 0.1}
REFERENCE_OPTION = {"kind": "put", "strike": 1.0, "maturity": 1.0, "spot": 1.0}
REFERENCE_GRID = {"n_time": 40, "m_half": 100, "x0": -2.0, "d": 0.02, "k_half": 50}
REFERENCE_ALPHA = 10.0

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2

ENV_OVERRIDE_PREFIX = "PRICER_"
