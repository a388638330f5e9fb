"""Utilities module for COMODI."""
