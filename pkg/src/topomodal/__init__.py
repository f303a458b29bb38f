"""Finite derivational and difference topomodal logic."""
from .formula import parse, pretty, sharp, u_translate
from .kripke import BiFrame
from .topospace import FiniteSpace
from .semantics import kripke_valid, topo_valid
from .logics import axiom, decide_bounded, get_logic

__all__ = [
    "parse", "pretty", "sharp", "u_translate", "BiFrame", "FiniteSpace",
    "kripke_valid", "topo_valid", "axiom", "decide_bounded", "get_logic",
]
__version__ = "0.1.0"
