"""
SpeedupLab - Tests Package
"""
