"""
Electronic Energy Transfer Applications
"""
