"""Roll damping with zero-speed fin stabilizers: models, control, stability and identification."""

__version__ = "0.1.0"
