from .bpu import BpuSuiteTool

__all__ = ["BpuSuiteTool"]
