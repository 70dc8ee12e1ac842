"""Discord distribution over small qubit networks: simulation + optimization."""

__version__ = "0.1.0"
