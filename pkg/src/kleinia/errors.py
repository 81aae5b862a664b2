"""Exception types shared across the package."""


class KleiniaError(Exception):
    """Base class for all package errors."""


class ClosureCapExceeded(KleiniaError):
    """Permutation closure grew past the configured order cap."""


class InvalidParams(KleiniaError):
    """Catalog family name or parameters outside the documented ranges."""


class RelationCheckFailed(KleiniaError):
    """A constructed catalog group violates its defining relations.

    This is a construction bug surfaced as a hard error, never a user error.
    """


class SubgroupCapExceeded(KleiniaError):
    """Subgroup lattice requested for a group above the configured cap."""


class NotNormal(KleiniaError):
    """Quotient requested by a non-normal subgroup."""


class GroupMismatch(KleiniaError):
    """Algebra elements over different parent groups were combined."""


class NotCyclicQuotient(KleiniaError):
    """epsilon(K, H) requires K/H cyclic."""


class NotShodaPair(KleiniaError):
    """e(G, K, H) requires (K, H) to be a strong Shoda pair."""


class NotIdempotent(KleiniaError):
    """Internal consistency failure: a claimed idempotent is not one."""


class IncompleteDecomposition(KleiniaError):
    """The strong-Shoda-pair scan did not reach the identity.

    Raised for groups outside the metabelian guarantee.  ``partial`` carries
    the pairs and idempotents found so far.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial if partial is not None else []


class SearchBudgetExceeded(KleiniaError):
    """The bounded epimorphism search ran out of nodes before exhausting.

    Distinct from a ``False`` verdict: the search space was not exhausted.
    """


class TwistingNotCentral(KleiniaError):
    """Crossed-product twisting value does not lie in the fixed field."""


class UnsupportedCenter(KleiniaError):
    """Split/definite decision requested over a center outside the supported list."""
