"""Utility modules: constants and file helpers."""
