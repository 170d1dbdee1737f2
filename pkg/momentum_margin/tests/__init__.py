"""
momentum_margin test suite
"""
