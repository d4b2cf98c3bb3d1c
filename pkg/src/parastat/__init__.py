"""Verification and simulation toolkit for R-matrix exchange statistics.

Subpackages:
  rmatrix      -- R-matrix tensors and their algebraic checks
  group_engine -- finite groups, irreps, fusion, and the derived R-matrix
  parafock     -- paraparticle Fock space on a chain
  game         -- the secret-communication challenge game and robustness runs
  gauge_sim    -- quantum-double lattice gauge validation at desk scale
  cli          -- command-line front end
"""

__version__ = "0.1.0"

from .rmatrix import (  # noqa: F401
    RMatrix,
    CheckReport,
    paper_r,
    trivial_r,
    braid_fixture,
    as_map,
    from_map,
    check_yang_baxter,
    check_unitary,
    check_perfect_tensor,
    is_trivial_product,
    spectral_invariants,
    builtin_r,
)
