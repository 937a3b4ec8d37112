from __future__ import annotations

import os
from pathlib import Path

DEFAULT_MAX_EVENTS = 10
DEFAULT_MAX_FRESH = 6
DEFAULT_ADV_DEPTH = 4

WORKERS_ENV = "MSRPROVE_WORKERS"
REPORT_SCHEMA = "msrprove.report/1"
CORPUS_DIR = Path(__file__).resolve().parent.parent / "corpus"
MANIFEST_NAME = "manifest.toml"


def worker_cap() -> int:
    """Number of exploration worker processes allowed by ``MSRPROVE_WORKERS``."""
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        requested = int(raw)
    except ValueError:
        return 1
    return max(1, min(requested, os.cpu_count() or 1))
