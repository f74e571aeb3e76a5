"""Discriminant-analysis losses, scatter-matrix tools and segmentation metrics."""

__version__ = "0.1.0"
