"""Multi-local black-box optimization for expensive objectives."""

__version__ = "0.1.0"
