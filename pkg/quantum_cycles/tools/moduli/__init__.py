from .moduli import ModuliSuiteTool

__all__ = ["ModuliSuiteTool"]
