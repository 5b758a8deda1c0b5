"""
MVRP - monocular vision-based relative pose estimation
Version: 1.0.0
"""

__version__ = "1.0.0"
