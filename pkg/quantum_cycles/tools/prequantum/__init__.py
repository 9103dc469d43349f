"""Prequantum line bundle suite."""

from .prequantum import PrequantumSuiteTool

__all__ = ["PrequantumSuiteTool"]
