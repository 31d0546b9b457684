import os
import logging
from dotenv import load_dotenv

logger = logging.getLogger(__name__)

# Load a .env file from the project root, if present
env_path = os.path.join(os.path.dirname(os.path.dirname(__file__)), '.env')
load_dotenv(env_path)

DEFAULT_SOLVER = "wronskian"
DEFAULT_EXECUTOR = "process"


def get_worker_count() -> int:
    """
    Worker cap for threshold scans, read from HEUNWELL_THREADS.

    Returns:
        int: At least 1. Unparseable values fall back to 1.
    """
    raw = os.getenv("HEUNWELL_THREADS", "1")
    try:
        workers = int(raw)
    except ValueError:
        logger.warning(f"Ignoring invalid HEUNWELL_THREADS={raw!r}, using 1 worker")
        return 1
    return max(1, workers)


def get_default_solver() -> str:
    """Spectrum solver used when none is named (HEUNWELL_SOLVER)."""
    solver = os.getenv("HEUNWELL_SOLVER", DEFAULT_SOLVER)
    if solver is None or not solver.strip():
        return DEFAULT_SOLVER
    return solver.lower().strip()


def get_executor_kind() -> str:
    """Pool kind for multi-worker scans (HEUNWELL_EXECUTOR): process or thread."""
    kind = (os.getenv("HEUNWELL_EXECUTOR", DEFAULT_EXECUTOR) or DEFAULT_EXECUTOR).lower().strip()
    if kind not in ("process", "thread"):
        logger.warning(f"Unknown HEUNWELL_EXECUTOR={kind!r}, using {DEFAULT_EXECUTOR}")
        return DEFAULT_EXECUTOR
    return kind
