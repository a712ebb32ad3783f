"""Checkpoint bridge: framework weights to FPWT containers and back."""

from .convert import (
    export,
    export_state_dict,
    import_pruned,
    import_pruned_file,
    layer_widths,
    load_checkpoint,
)
from .errors import BridgeError, FormatError, MappingError, ShapeError
from .fpwt import Container, read_fpwt, write_fpwt
from .templates import (
    ArchTemplate,
    make_template,
    resnet_cifar_template,
    resnet_imagenet_template,
    vgg_chain,
    vgg_template,
)

__version__ = "0.1.0"

__all__ = [
    "ArchTemplate",
    "BridgeError",
    "Container",
    "FormatError",
    "MappingError",
    "ShapeError",
    "export",
    "export_state_dict",
    "import_pruned",
    "import_pruned_file",
    "layer_widths",
    "load_checkpoint",
    "make_template",
    "read_fpwt",
    "resnet_cifar_template",
    "resnet_imagenet_template",
    "vgg_chain",
    "vgg_template",
    "write_fpwt",
]
