"""First-order methods built on inexact (delta, L)-models."""

__version__ = "0.1.0"
