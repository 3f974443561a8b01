"""Exception types shared across the toolkit.

Every failure that maps to a reportable condition carries a short ``flag``
string so the CLI can surface it in JSON reports without string-matching
exception messages.
"""

from __future__ import annotations


class GatewayTomoError(Exception):
    """Base class for all toolkit errors."""

    flag: str | None = None


class InputError(GatewayTomoError, ValueError):
    """Malformed, inconsistent, or out-of-contract caller input."""


class CapabilityError(GatewayTomoError):
    """Request outside what the method or this implementation supports."""


class NotEstimableError(CapabilityError):
    """The network topology does not admit reconstruction from boundary data."""

    flag = "NotEstimable"

    def __init__(self, reason: str):
        super().__init__(f"graph is not estimable: {reason}")
        self.reason = reason


class NumericError(GatewayTomoError):
    """A numerical routine could not meet its contract on the given data."""


class GaugeDegeneracyError(NumericError):
    """(Near-)degenerate eigenvalues: per-eigenvector site gauge is undefined."""

    flag = "GaugeDegeneracy"

    def __init__(self, message: str, pairs: list[tuple[int, int]] | None = None):
        super().__init__(message)
        self.pairs = pairs or []


class DarkStateError(NumericError):
    """Some eigenvector has (numerically) zero amplitude on the chosen site."""

    flag = "DarkState"

    def __init__(self, node: int, indices: list[int]):
        super().__init__(
            f"site {node} carries no weight in eigenstates {indices}; "
            "it cannot serve as a gauge or recursion reference"
        )
        self.node = node
        self.indices = indices


class NearZeroDivisionError(NumericError):
    """A recursion step would divide by a vanishing coupling amplitude."""

    flag = "NearZeroDivision"

    def __init__(self, node: int, edge: tuple[int, int], value: float):
        super().__init__(
            f"residual norm {value:.3e} at site {node} is below the coupling "
            f"floor; edge {edge} cannot be resolved"
        )
        self.node = node
        self.edge = edge
        self.value = value


class InconsistentDataError(NumericError):
    """Measured data contradicts the declared topology beyond tolerance."""

    flag = "InconsistentData"


class SignAmbiguityError(NumericError):
    """Relative eigenvector signs cannot be chained through a junction."""

    flag = "SignAmbiguity"

    def __init__(self, node: int, indices: list[int]):
        super().__init__(
            f"junction {node} has near-zero overlap in eigenstates {indices}; "
            "relative signs of the arriving coefficient families are undetermined"
        )
        self.node = node
        self.indices = indices


class IllConditionedError(NumericError):
    """A linear solve is too poorly conditioned to trust."""

    flag = "IllConditioned"

    def __init__(self, message: str, condition_number: float):
        super().__init__(message)
        self.condition_number = condition_number


class RankDeficientError(NumericError):
    """The cycle moment system is rank deficient even after augmentation."""

    flag = "RankDeficientUnresolvable"


class FewerPeaksError(NumericError):
    """The magnitude spectrum has fewer maxima than requested peaks."""

    flag = "FewerPeaks"

    def __init__(self, requested: int, found):
        super().__init__(
            f"requested {requested} spectral peaks but only "
            f"{len(found.peaks)} local maxima exist"
        )
        self.requested = requested
        self.found = found
