"""Typed failures for the checkpoint bridge."""


class BridgeError(Exception):
    """Base for every error this package raises on purpose."""


class FormatError(BridgeError):
    """Malformed FPWT file: bad magic, version, header, or payload bounds."""


class MappingError(BridgeError):
    """Checkpoint parameter names don't line up with the template."""


class ShapeError(BridgeError):
    """Tensor shapes are inconsistent with the declared layer graph."""
