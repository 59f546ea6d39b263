"""Command-line entry point for the area-law verification tool."""
from __future__ import annotations

from arealaw_logic.cli import main

if __name__ == "__main__":  # pragma: no cover - manual execution
    raise SystemExit(main())
