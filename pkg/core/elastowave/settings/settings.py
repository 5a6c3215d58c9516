import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

# Base Paths
BASE_DIR = Path(__file__).resolve().parent.parent

# Output locations
OUTPUT_DIR = Path(os.getenv("ELASTOWAVE_OUTPUT_DIR", str(BASE_DIR / "files" / "runs")))

# Worker pool (0 = one worker per CPU)
THREADS = int(os.getenv("ELASTOWAVE_THREADS", "0") or 0)

# Logging
LOG_LEVEL = os.getenv("ELASTOWAVE_LOG_LEVEL", "INFO")

# Operator construction
MAX_DEGREE = 16
NEWTON_TOL = 1e-14
NEWTON_MAX_ITER = 100

# Time stepping
DEFAULT_CFL = 0.9

# PML defaults
PROFILE_EXPONENT = 3
DEFAULT_ALPHA_2D = 0.15
DEFAULT_3D_TOL = 1e-3

# Output formatting
SNAPSHOT_BYTE_ORDER = "<"
CSV_FLOAT_FORMAT = "{:.16e}"
METADATA_FILE = "metadata.json"

# Solver Settings (shared configuration for simulations)
SOLVER_SETTINGS = {
    "cfl": DEFAULT_CFL,
    "max_degree": MAX_DEGREE,
    "profile_exponent": PROFILE_EXPONENT,
    "alpha_2d": DEFAULT_ALPHA_2D,
    "tol_3d": DEFAULT_3D_TOL,
    "output_dir": str(OUTPUT_DIR),
}


def worker_count() -> int:
    """Resolve ELASTOWAVE_THREADS into a positive worker count."""
    if THREADS > 0:
        return THREADS
    return os.cpu_count() or 1
