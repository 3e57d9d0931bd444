"""Finite-algebra toolkit: congruences, genes, rectangulation, semilattice
operations, extensions, principal congruence formulas and semirings."""
from .algebra import (FiniteAlgebra, Operation, direct_power, evaluate_term,
                      find_embeddings, free_algebra, generate_subuniverse,
                      load_algebra, quotient, term_table)
from .congruence import (Congruence, congruence_lattice, is_subdirectly_irreducible,
                         largest_singleton_congruence, monolith, natural_quasiorder,
                         principal_congruence, quasiorder_kernel, unary_polynomials)
from .errors import (InconsistencyError, InvalidCongruenceError, MalformedInput,
                     PreconditionError, ScaleError, SignatureError)
from .terms import App, Const, TermExpr, Var

__version__ = "0.1.0"
