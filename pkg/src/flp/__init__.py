"""Logic programs with firm cut: completion, operational semantics, DFNF and valuation."""

__version__ = "0.1.0"
