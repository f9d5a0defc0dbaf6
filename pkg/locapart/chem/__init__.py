"""
Molecular Electronic Structure on Partitioned Space
"""
