"""Explicit-state model checking for CTL* with cycle quantifiers."""
from .formula import Formula, parse, parse_path, to_text, to_nnf
from .kripke import KripkeStructure, load_kripke, dump_kripke, make_kripke
from .checker import model_check, LabelingTable, Verdict
from .oracle import brute_force_eval, BudgetExceeded

__all__ = [
    "Formula", "parse", "parse_path", "to_text", "to_nnf",
    "KripkeStructure", "load_kripke", "dump_kripke", "make_kripke",
    "model_check", "LabelingTable", "Verdict",
    "brute_force_eval", "BudgetExceeded",
]
__version__ = "0.1.0"
