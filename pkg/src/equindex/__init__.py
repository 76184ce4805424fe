"""equindex: indices of linearized Hamiltonian/Lagrangian systems under dihedral symmetry.

The package computes Maslov-type intersection indices of Lagrangian paths,
spectral flows and Morse indices of Galerkin-discretised selfadjoint
families, dihedral isotypic decompositions of loop spaces, the associated
equivariant index summation identities, stability criteria built on
quasi-periodic Morse indices, and the Morse index table of the planar
three-body figure-eight orbit.
"""

__version__ = "0.1.0"

from .config import DEFAULT, Tolerances, override  # noqa: F401
