"""Numerical services for heisenflow."""

# Version tag of the built-in test dictionaries
DICTIONARY_VERSION = "1"
