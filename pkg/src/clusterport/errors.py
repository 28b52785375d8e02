"""Exception types shared across the package."""


class ClusterportError(Exception):
    """Base class for all errors raised by clusterport."""


class DimensionError(ClusterportError, ValueError):
    """Invalid level count, or mismatched ``d`` between operands."""


class ResourceError(ClusterportError):
    """Register would exceed the amplitude cap."""


class ImpossibleBranchError(ClusterportError):
    """A forced measurement outcome has (numerically) zero probability."""


class GraphError(ClusterportError, ValueError):
    """Malformed cluster graph or unsupported topology for an operation."""


class ProtocolBrokenError(ClusterportError):
    """No correction restores the input; signals a topology or convention bug."""
