"""
Utility functions: finite differences and SVG charts
"""
