"""Graph-based robustness analysis of XOR relay coding schemes."""

__version__ = "0.1.0"
