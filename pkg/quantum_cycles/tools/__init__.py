"""Verification suites, one per geometric layer."""

from typing import List

from quantum_cycles.interfaces.tool import Tool
from .bohr_sommerfeld import BohrSommerfeldSuiteTool
from .bpu import BpuSuiteTool
from .moduli import ModuliSuiteTool
from .prequantum import PrequantumSuiteTool
from .projective_qm import ProjectiveSuiteTool
from .toeplitz import ToeplitzSuiteTool


def all_suites() -> List[Tool]:
    return [
        ProjectiveSuiteTool(),
        PrequantumSuiteTool(),
        ToeplitzSuiteTool(),
        BohrSommerfeldSuiteTool(),
        ModuliSuiteTool(),
        BpuSuiteTool(),
    ]


__all__ = [
    "BohrSommerfeldSuiteTool",
    "BpuSuiteTool",
    "ModuliSuiteTool",
    "PrequantumSuiteTool",
    "ProjectiveSuiteTool",
    "ToeplitzSuiteTool",
    "all_suites",
]
