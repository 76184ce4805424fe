"""Exception types raised by the toolkit."""


class EquindexError(Exception):
    """Base class for all toolkit errors."""


class NotInvolutive(EquindexError):
    """Matrix fails the involution test U^2 = I within tolerance."""


class RankDeficient(EquindexError):
    """A frame has linearly dependent columns or the wrong column count."""


class NotSymplectic(EquindexError):
    """Matrix fails the symplecticity test within tolerance."""


class NonIsolatedCrossing(EquindexError):
    """A Lagrangian path stays on the singular cycle over a subinterval."""


class UnresolvableDegeneracy(EquindexError):
    """Perturbation sweeps failed to stabilise an integer invariant."""


class MeshIncommensurate(EquindexError):
    """Mesh size is not divisible by 2n, so the group action is not a grid map."""


class InvalidComponent(EquindexError):
    """Isotypic component label (k, h, sign) is out of range."""


class LegendreViolation(EquindexError):
    """Leading coefficient P(t) is not positive definite at a quadrature node."""


class DriftExceeded(EquindexError):
    """Symplectic re-projection could not hold the drift tolerance."""


class SymmetryViolated(EquindexError):
    """Coefficient data does not satisfy the declared equivariance relations."""


class CenterOfMassNonzero(EquindexError):
    """Configuration is not reduced to the zero center of mass."""


class CollisionProximity(EquindexError):
    """Configuration is closer to the collision set than the safety floor."""


class CollisionDuringDescent(EquindexError):
    """Action minimisation ran into the collision set."""


class NoConvergence(EquindexError):
    """Iteration budget exhausted before reaching the requested tolerance."""


class ProbeInconclusive(EquindexError):
    """One-sided index probes disagree; eigenvalue cluster tighter than probes."""


class CriterionViolated(EquindexError):
    """A proved implication failed numerically; reported as a falsification candidate."""
