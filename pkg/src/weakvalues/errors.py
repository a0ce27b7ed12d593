"""Exception hierarchy shared by all weakvalues modules."""


class WeakValueError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(WeakValueError, ValueError):
    pass


class NotHermitian(WeakValueError, ValueError):
    pass


class InvalidState(WeakValueError, ValueError):
    pass


class PostselectionImpossible(WeakValueError):
    """The postselection probability is below the configured floor."""


class VanishingConditioning(WeakValueError):
    """Tr[E rho] is too small to condition on."""


class DegenerateOverlap(WeakValueError):
    """No perturbed eigenvector has a usable overlap with the unperturbed one."""


class NoUnbiasedEstimator(WeakValueError):
    """The target observable is not in the span of the probability operators."""


class SingularBasisPair(WeakValueError):
    """Some <f|a> vanishes, so the Kirkwood-Dirac operator basis is undefined."""


class OrthogonalBranches(WeakValueError):
    pass


class TruncationOverflow(WeakValueError):
    """Fock truncation discards more probability mass than allowed."""


class UndampedDrive(WeakValueError):
    pass
