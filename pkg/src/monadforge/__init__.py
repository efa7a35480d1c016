"""Exact cohomology of monads on P^3, their extensions and splitting on lines,
plus numerical checks of instanton connections and Dirac zero modes.

Modules: exact_field, graded, complexes, omega, monad, extensions, lines,
expr, connections, cli.
"""
from .exact_field import DenseMatrix, Field, GaussianField, PrimeField, RationalField
from .monad import (CohomologyTable, Monad, cohomology, gen_instanton_syzygy,
                    gen_null_correlation, validate_monad)

__version__ = "0.1.0"

__all__ = ["DenseMatrix", "Field", "GaussianField", "PrimeField", "RationalField",
           "CohomologyTable", "Monad", "cohomology", "gen_instanton_syzygy",
           "gen_null_correlation", "validate_monad", "__version__"]
