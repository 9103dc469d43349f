"""Numerical geometry behind the verification suites."""
