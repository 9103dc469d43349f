from .toeplitz import ToeplitzSuiteTool

__all__ = ["ToeplitzSuiteTool"]
