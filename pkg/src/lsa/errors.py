"""Exception types shared across the library.

The CLI maps these onto exit codes: any InputError exits 2, any
BudgetExceeded (including WitnessNotFound) exits 3.  A detected bound
violation is not an exception; `lsa verify` exits 4 for it.
"""


class LsaError(Exception):
    """Base class for all library errors."""


class InputError(LsaError, ValueError):
    """Invalid input: bad dictionary, bad parameters, malformed files."""


class BudgetExceeded(LsaError):
    """An enumeration hit its subset budget before finishing.

    Signals "not computed"; the partial state is discarded so a budgeted
    run can never report a wrong value.
    """


# -- dictionary construction / validation ------------------------------------

class NonFiniteEntry(InputError):
    pass


class ZeroColumn(InputError):
    pass


class NotNormalized(InputError):
    pass


# -- invariant preconditions --------------------------------------------------

class SingleAtom(InputError):
    """Coherence is undefined for a one-column dictionary."""


class SparsityTooLarge(InputError):
    """Generalized coherence of degree k needs 2k <= N."""


class OverlappingSupports(InputError):
    pass


class InvalidSupport(InputError):
    pass


# -- construction parameters --------------------------------------------------

class EpsOutOfRange(InputError):
    pass


class DimensionTooSmall(InputError):
    pass


class OddSplit(InputError):
    pass


class OddDimension(InputError):
    pass


class SOutOfRange(InputError):
    pass


class ParameterOutOfRange(InputError):
    pass


class KerdockSetInvalid(LsaError):
    """The programmatic Kerdock-set check failed.

    This is a construction bug, not a user error: the generator refuses to
    hand out a dictionary whose mutually-unbiased structure is unverified.
    """


# -- solvers -------------------------------------------------------------------

class ZeroTarget(InputError):
    pass


class WitnessNotFound(BudgetExceeded):
    """The heuristic expanding-sphere search exhausted its iteration budget."""


class DepthTooLarge(InputError):
    pass
