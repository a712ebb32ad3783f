"""Exception types raised by the pruning engine."""


class RepruneError(Exception):
    """Base class for all engine errors."""


class ContainerError(RepruneError):
    """Base class for weight container I/O errors."""


class BadMagicError(ContainerError):
    """File does not start with the FPWT magic bytes."""


class UnsupportedVersionError(ContainerError):
    """Container version is not supported by this reader."""


class HeaderError(ContainerError):
    """Container header is malformed or inconsistent."""


class TruncatedPayloadError(ContainerError):
    """Payload section is shorter than the header declares."""


class TensorSizeError(ContainerError):
    """Declared tensor shape disagrees with its byte length."""


class NonFiniteTensorError(ContainerError):
    """A tensor holds NaN or infinite values and cannot be written."""


class InvalidSnapshotError(ContainerError):
    """Snapshot violates a structural invariant."""


class UnknownLayerError(RepruneError):
    """Layer name not present in the snapshot."""


class NotConvLayerError(RepruneError):
    """Operation requires a convolution layer."""


class GraphError(RepruneError):
    """Layer graph is inconsistent (cycle, missing producer, bad fan-in)."""


class AddConflictError(GraphError):
    """Kept channel sets cannot be reconciled at an add node."""


class SingletonClusterError(RepruneError):
    """Cohesion is undefined for a cluster with a single member."""


class SingleClusterError(RepruneError):
    """Separation is undefined when only one cluster exists."""


class KOutOfRangeError(RepruneError):
    """Requested cluster count is outside [1, n_leaves]."""


class UnknownClusterError(RepruneError):
    """Cluster id not present in the assignment."""


class KeepOutOfRangeError(RepruneError):
    """Requested keep count is outside [1, n_filters]."""


class WeiszfeldNonConvergence(RepruneError):
    """Geometric median iteration did not converge within max_iter."""

    def __init__(self, message, last_iterate):
        super().__init__(message)
        self.last_iterate = last_iterate


class ShapeMismatchError(RepruneError):
    """Tensor shapes disagree with what a plan or comparison expects."""
