"""Finitely correlated chain states: construction, modular data, symmetry and purity diagnostics."""

from .errors import FCSError
from .popescu import ChainState, PopescuSystem, chain_state, validate_system

__all__ = ["FCSError", "ChainState", "PopescuSystem", "chain_state", "validate_system"]
__version__ = "0.1.0"
