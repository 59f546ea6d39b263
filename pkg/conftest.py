"""Puts the repository root on sys.path so tests import arealaw_logic directly."""
