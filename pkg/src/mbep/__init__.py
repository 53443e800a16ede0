"""Multi-block exceptional points in Lindbladians of small open quantum systems."""

__version__ = "0.1.0"
