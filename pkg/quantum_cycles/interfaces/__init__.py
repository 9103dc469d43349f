"""Tool and resource abstractions."""
