"""
Common utilities package for hawkes_lift
"""
