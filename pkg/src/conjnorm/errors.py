"""
Exception hierarchy for Conjnorm

Input problems, broken preconditions and resource guards are raised as
exceptions. Mathematical outcomes (failing witnesses, contained words,
exhausted searches) are never raised; they are returned as reports.
"""

from typing import Optional


class ConjnormError(Exception):
    """Base class for all Conjnorm errors."""


class MalformedInputError(ConjnormError):
    """Input text or values that cannot be turned into domain objects."""

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
        source: Optional[str] = None,
    ):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        super().__init__(str(self))

    def __str__(self) -> str:
        location = []
        if self.source:
            location.append(self.source)
        if self.line is not None:
            location.append(f"line {self.line}")
        if self.column is not None:
            location.append(f"column {self.column}")
        if location:
            return f"{', '.join(location)}: {self.message}"
        return self.message


class MalformedWordError(MalformedInputError):
    """A letter sequence is not a valid word of the stated rank."""


class PermutationParseError(MalformedInputError):
    """A permutation string is not a bijection of the stated degree."""


class ContractError(ConjnormError):
    """A precondition of an operation does not hold.

    Attributes:
        invariant: Short name of the violated precondition
    """

    invariant = "contract"

    def __init__(self, message: str, invariant: Optional[str] = None):
        if invariant:
            self.invariant = invariant
        super().__init__(f"{self.invariant}: {message}")


class RankMismatchError(ContractError):
    invariant = "equal-rank"


class GroupMismatchError(ContractError):
    invariant = "same-group"


class NotNormalSubgroupError(ContractError):
    invariant = "normal-subgroup"


class GenerationError(ContractError):
    """The supplied set does not generate the group and padding is off."""

    invariant = "generates"


class NonInjectiveMapError(ContractError):
    invariant = "injective"


class RelatorNotKilledError(ContractError):
    invariant = "kills-relators"


class ChainNotDescendingError(ContractError):
    invariant = "descending-chain"


class CertificateError(ContractError):
    """A decomposition certificate does not multiply out to its word."""

    invariant = "certificate"


class ResourceLimitError(ConjnormError):
    """A configured cap would be exceeded."""

    def __init__(self, limit: str, cap: int, requested: int):
        self.limit = limit
        self.cap = cap
        self.requested = requested
        super().__init__(
            f"{limit} would reach {requested}, above the configured cap {cap}"
        )
