"""Exception types shared across the package."""


class NlsymError(Exception):
    """Base class for library errors."""


class BoundExceeded(NlsymError):
    """A size bound was exceeded (group order, vertex count, search size)."""


class IndexMismatch(NlsymError):
    """Two correlations live on different index sets."""


class NotInvariant(NlsymError):
    """A correlation is not invariant under the group action."""


class NotDoublyStochastic(NlsymError):
    """A matrix fails the doubly stochastic test."""


class NotB4(NlsymError):
    """Input is not a bijective correlation on four points."""


class NotMagicUnitary(NlsymError):
    """Input array of projections is not a magic unitary."""


class NotDisjoint(NlsymError):
    """Automorphisms move a common point."""


class NotAutomorphism(NlsymError):
    """A permutation does not preserve adjacency."""


class NotConnectedRegular(NlsymError):
    """Spectral criteria need connected regular graphs."""


class PrecisionExhausted(NlsymError):
    """Interval refinement hit the precision cap without deciding a sign."""


class ParseError(NlsymError, ValueError):
    """Malformed literal or input file."""
