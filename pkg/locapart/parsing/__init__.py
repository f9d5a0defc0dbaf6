"""
Scenario and Data File Parsing
"""
