"""COMODI - component developer toolchain and wiring framework for scientific code."""

__version__ = "0.1.0"
