"""Exact computations with Hochschild complexes, simplicial structure maps and
fattened props."""
from .exactlin import QQ, ZZ, GF, ring_from_name
from .chain import FreeComplex, ChainMap, homology
from .hochschild import (DgAlgebra, algebra_by_name, builtin_algebras, hochschild_complex,
                         hh_ranks, c_vec, PAlgebraModel)
from .props import PropPresentation, PMor, PTensorMor, prop_by_name
from .fatten import WordSum, act, reduce_word, word_compose, word_tensor, word_differential

__version__ = "0.1.0"

__all__ = [
    "QQ", "ZZ", "GF", "ring_from_name", "FreeComplex", "ChainMap", "homology",
    "DgAlgebra", "algebra_by_name", "builtin_algebras", "hochschild_complex", "hh_ranks",
    "c_vec", "PAlgebraModel", "PropPresentation", "PMor", "PTensorMor", "prop_by_name",
    "WordSum", "act", "reduce_word", "word_compose", "word_tensor", "word_differential",
]
