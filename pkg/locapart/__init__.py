"""
Localized Electronic Energy Partitioning
"""

__version__ = "0.1.0"
