"""Shared helpers: logging, middleware, validation and formatting."""
