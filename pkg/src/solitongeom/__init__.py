"""Numerical codimension-one geometry for self-shrinker identities and tangent-plane omission."""

__version__ = "0.1.0"
