"""
Configuration, tolerances and figure presets
"""
