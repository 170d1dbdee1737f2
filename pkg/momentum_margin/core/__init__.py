"""
Core analysis: method specs, lifting, spectral sweeps, gain margin and simulation
"""
