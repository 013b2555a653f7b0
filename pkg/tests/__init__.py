"""Test suite for cavity_thermo."""
