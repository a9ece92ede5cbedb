"""
Core numerical and task modules
"""
