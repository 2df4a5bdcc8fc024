"""hcstream - hierarchical clustering under Dasgupta's cost for edge streams."""

__version__ = "0.1.0"
