"""Exception types shared across the toolkit."""

from __future__ import annotations

from fractions import Fraction


class CxlPodError(Exception):
    """Base class for all toolkit errors."""


class IndivisibleParams(CxlPodError):
    """The requested port counts admit no integral design."""


class FisherViolation(CxlPodError):
    """The derived design would need fewer MHDs than hosts (b < v)."""


class SearchExhausted(CxlPodError):
    """The construction search hit its node budget without a design."""

    def __init__(self, message: str, nodes_expanded: int):
        super().__init__(message)
        self.nodes_expanded = nodes_expanded


class NoDesignExists(CxlPodError):
    """The construction search proved no design exists for the parameters."""

    def __init__(self, message: str, nodes_expanded: int):
        super().__init__(message)
        self.nodes_expanded = nodes_expanded


class UnknownHost(CxlPodError):
    """A host identifier is not part of the topology."""


class UnknownAllocation(CxlPodError):
    """An allocation id is not live in the pool state."""


class InsufficientCapacity(CxlPodError):
    """A request exceeds the capacity reachable from the host."""

    def __init__(self, message: str, available: Fraction):
        super().__init__(message)
        self.available = available


class MalformedTrace(CxlPodError):
    """A trace file or event sequence is not replayable."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class EmptyPlan(CxlPodError):
    """An interleave plan was requested for an allocation with no shares."""


class NoCommonMhd(CxlPodError):
    """A host pair has no shared MHD (corrupted topology input)."""


class UnsupportedTopology(CxlPodError):
    """The operation is not defined for this topology kind."""


class ZeroGoodDies(CxlPodError):
    """A SKU yields no good dies, so cost ratios are undefined."""
