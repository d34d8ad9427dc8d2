"""Exact computations in the Bing space and a certified back-and-forth extension engine."""
from .covers import Cell, CellBijection, CutInterval, DiamondCell, LazyPartition
from .engine import Engine, EngineConfig, Stage, WellOrder, continuity_audit
from .exact import QF3Value, QuadSum, Rational, qf3, sign_quadsum
from .topology import BasicNbhd, Point, point

__all__ = [
    "BasicNbhd", "Cell", "CellBijection", "CutInterval", "DiamondCell", "Engine",
    "EngineConfig", "LazyPartition", "Point", "QF3Value", "QuadSum", "Rational", "Stage",
    "WellOrder", "continuity_audit", "point", "qf3", "sign_quadsum",
]
