"""Deterministic emulation of asymmetric, dynamically reconfigured network links."""

from ._core import (
    ConfigError,
    Emulator,
    ParseError,
    RunError,
    allocate_cap_clip,
    allocate_maxmin,
    delay_histogram,
    main,
    normalize,
    verify,
)

__all__ = [
    "ConfigError",
    "Emulator",
    "ParseError",
    "RunError",
    "allocate_cap_clip",
    "allocate_maxmin",
    "delay_histogram",
    "main",
    "normalize",
    "verify",
    "load",
]


def load(path):
    """Read a scenario file and return an Emulator-ready document string."""
    with open(path, encoding="utf-8") as fh:
        return fh.read()
