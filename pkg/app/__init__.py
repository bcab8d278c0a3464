"""
SpeedupLab HTTP API - FastAPI Application
"""
