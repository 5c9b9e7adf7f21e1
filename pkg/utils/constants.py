import math

# Quadrature / tail truncation
TAIL_MASS = 1e-12
NORMALIZATION_TOL = 1e-8
SYMMETRY_TOL = 1e-10

# Elasticity scan
ETA_SCAN_POINTS = 4096
ETA_SCAN_XMIN_FACTOR = 1e-6
ETA_MONOTONE_TOL = 1e-7
ETA_INVERSE_TOL = 1e-9
COMPACT_SCAN_OVERSHOOT = 1.01

# Finite differences and brute force
FD_STEP = 1e-4
EXHAUSTIVE_MAX_CELLS = 16
EXHAUSTIVE_MAX_CANDIDATES = 2 ** 16
MASS_MATCH_TOL = 1e-10

CSV_FLOAT_FORMAT = "%.12g"


def ball_volume(n: int) -> float:
    """Volume of the unit n-ball, V_n = pi^(n/2) / Gamma(n/2 + 1)."""
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)
