"""
Test package for the synchronverter stability toolkit.
"""
