from .bohr_sommerfeld import BohrSommerfeldSuiteTool

__all__ = ["BohrSommerfeldSuiteTool"]
