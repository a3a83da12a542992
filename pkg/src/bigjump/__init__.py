"""Asymptotics of X1/d given X1 + X2 = d for i.i.d. non-negative variables."""

__version__ = "0.1.0"
