"""Exact verification engine for polynomial and differential-algebra computations."""
from .corpus import Corpus, load_corpus
from .poly import Poly, Symbol, SymbolTable
from .steps import RunOptions, StepResult, run_all, run_step

__all__ = ["Corpus", "load_corpus", "Poly", "Symbol", "SymbolTable", "RunOptions", "StepResult",
           "run_all", "run_step"]
__version__ = "0.1.0"
