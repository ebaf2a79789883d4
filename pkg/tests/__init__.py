"""Test suite for heisenflow."""
