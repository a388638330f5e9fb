"""Core models: configuration, errors, diagnostics and the primitive type catalog."""
