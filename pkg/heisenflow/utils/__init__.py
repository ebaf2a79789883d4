"""Utility modules for heisenflow."""
