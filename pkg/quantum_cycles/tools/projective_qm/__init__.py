"""Projective quantum mechanics suite."""

from .projective_qm import ProjectiveSuiteTool

__all__ = ["ProjectiveSuiteTool"]
