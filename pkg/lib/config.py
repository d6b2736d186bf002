# lib/config.py
from __future__ import annotations

import logging
import os
from pathlib import Path

# Optional .env support
try:
    from dotenv import load_dotenv  # type: ignore

    load_dotenv(dotenv_path=Path(__file__).resolve().parent.parent / ".env")
except Exception:
    # Without python-dotenv the defaults below and plain env vars still apply.
    pass


def _env_bool(key: str, default: bool) -> bool:
    v = os.getenv(key, str(default)).strip().lower()
    return v in {"1", "true", "yes", "y", "on"}


def _env_int(key: str, default: int) -> int:
    v = os.getenv(key, "").strip()
    if not v:
        return default
    try:
        return int(v)
    except ValueError:
        raise SystemExit(f"{key} must be an integer, got {v!r}")


# .env defaults
CUTWIDTH_CAP = _env_int("LHOM_CUTWIDTH_CAP", 20)
FVS_CAP = _env_int("LHOM_FVS_CAP", 25)
CA_CAP = _env_int("LHOM_CA_CAP", 14)
NODE_BUDGET = _env_int("LHOM_NODE_BUDGET", 2_000_000)
SYNTH_DEPTH = _env_int("LHOM_SYNTH_DEPTH", 16)
SYNTH_STATES = _env_int("LHOM_SYNTH_STATES", 200_000)
WALK_MAX_LEN = _env_int("LHOM_WALK_MAX_LEN", 24)
PRIME = _env_int("LHOM_PRIME", 2_147_483_647)  # 2^31 - 1
MAX_PRIME = 3_037_000_499  # floor(sqrt(2^63 - 1)): a product of two residues fits in int64
if not 2 <= PRIME <= MAX_PRIME:
    raise SystemExit(f"LHOM_PRIME must be in 2..{MAX_PRIME}, got {PRIME}")
BENCH_TIMEOUT = _env_int("LHOM_BENCH_TIMEOUT", 30)
LOG_LEVEL = os.getenv("LHOM_LOG_LEVEL", "WARNING").strip().upper()
DEBUG = _env_bool("DEBUG", False)

LOG_FORMAT = "[%(levelname)s] %(name)s: %(message)s"

_configured = False


def configure_logging(verbose: bool = False) -> None:
    """
    Install the root handler once. DEBUG=true or verbose=True forces debug output.
    """
    global _configured
    level = logging.DEBUG if (DEBUG or verbose) else getattr(logging, LOG_LEVEL, logging.WARNING)
    if _configured:
        logging.getLogger().setLevel(level)
        return
    logging.basicConfig(level=level, format=LOG_FORMAT)
    _configured = True
