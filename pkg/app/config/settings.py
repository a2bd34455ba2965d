"""
Configuration settings and environment variables.
"""

import os

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Runtime Configuration
LOG_LEVEL = os.getenv("HEAT_LOG_LEVEL", "INFO").upper()
DEFAULT_THREADS: int = int(os.getenv("HEAT_THREADS", "1"))

# Dense Solver Configuration
DENSE_SOLVE_LIMIT: int = int(os.getenv("HEAT_DENSE_LIMIT", "5000"))  # ~200 MB of float64
RESIDUAL_TOLERANCE = 1e-10
CONDITION_LIMIT = 1e12
FIXED_POINT_DAMPING = 0.8
FIXED_POINT_MAX_SWEEPS = 10_000
DIVERGENCE_WINDOW = 10  # consecutive growing sweeps

# Sampling Configuration
RETRY_FACTOR = 200  # candidate draws per particle before giving up
SEPARATION_FRACTION = 0.5  # d as a fraction of the nominal spacing
SEPARATION_RATIO_FLOOR = 3.0  # smallest d/a kept without a warning
THINNING_BATCH = 256

# Quadrature Configuration
MIDPOINT_ORDER = 4  # midpoint nodes per axis in a regular cell
INTEGRATION_ORDER = 24  # Gauss-Legendre nodes per axis for box integrals
POINT_CHUNK = 256  # evaluation points per vectorized block

# Verification Configuration
MIN_THETA_NODES = 8
TAIL_TOLERANCE = 5e-3
BOUNDARY_UPDATE_INTERVAL = 10  # time steps between exterior boundary refreshes
