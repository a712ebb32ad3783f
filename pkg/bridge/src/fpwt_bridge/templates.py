"""Architecture templates: named layer graphs for common model families.

A template pins down everything a checkpoint file doesn't carry: the layer
graph (predecessors, residual adds), parameter naming, which layers have
biases, and the spatial size of every conv output, derived from the input
resolution. Channel widths are defaults only — export reads the real widths
from the checkpoint, so pruned checkpoints fit the same template.

Naming follows the torchvision conventions (features.N, layerS.B.convK,
downsample.0/1, fc) so real checkpoints map without renaming.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import MappingError

_VGG_PLANS = {
    11: (64, "M", 128, "M", 256, 256, "M", 512, 512, "M", 512, 512, "M"),
    13: (64, 64, "M", 128, 128, "M", 256, 256, "M", 512, 512, "M", 512, 512, "M"),
    16: (64, 64, "M", 128, 128, "M", 256, 256, 256, "M",
         512, 512, 512, "M", 512, 512, 512, "M"),
    19: (64, 64, "M", 128, 128, "M", 256, 256, 256, 256, "M",
         512, 512, 512, 512, "M", 512, 512, 512, 512, "M"),
}

_RESNET_IMAGENET_PLANS = {
    18: ("basic", (2, 2, 2, 2)),
    34: ("basic", (3, 4, 6, 3)),
    50: ("bottleneck", (3, 4, 6, 3)),
}


@dataclass
class ArchTemplate:
    """A layer graph plus the parameter-name conventions to fill it from."""

    name: str
    family: str
    layers: list[dict] = field(default_factory=list)
    conv_bias: bool = False

    def float_parameters(self) -> list[tuple[str, str]]:
        """(tensor name, owning layer) for every float tensor, graph order."""
        out = []
        for spec in self.layers:
            kind, lname = spec["kind"], spec["name"]
            if kind == "conv":
                out.append((f"{lname}.weight", lname))
                if self.conv_bias:
                    out.append((f"{lname}.bias", lname))
            elif kind == "linear":
                out.append((f"{lname}.weight", lname))
                out.append((f"{lname}.bias", lname))
            elif kind == "batchnorm":
                for part in ("weight", "bias", "running_mean", "running_var"):
                    out.append((f"{lname}.{part}", lname))
        return out

    def int_buffers(self) -> list[str]:
        """Integer step counters that FPWT metadata carries instead of payload."""
        return [
            f"{spec['name']}.num_batches_tracked"
            for spec in self.layers
            if spec["kind"] == "batchnorm"
        ]


def _conv(name, n_in, n_out, k, out_hw, stride=1, padding=None, preds=()):
    return {
        "name": name,
        "kind": "conv",
        "n_in": n_in,
        "n_out": n_out,
        "kernel_h": k,
        "kernel_w": k,
        "out_h": out_hw,
        "out_w": out_hw,
        "stride": stride,
        "padding": k // 2 if padding is None else padding,
        "predecessors": [str(p) for p in preds],
    }


def _bn(name, width, pred):
    return {
        "name": name,
        "kind": "batchnorm",
        "n_in": width,
        "n_out": width,
        "kernel_h": 0,
        "kernel_w": 0,
        "out_h": 0,
        "out_w": 0,
        "stride": 1,
        "padding": 0,
        "predecessors": [pred],
    }


def _plain(name, kind, n_in, n_out, preds):
    return {
        "name": name,
        "kind": kind,
        "n_in": n_in,
        "n_out": n_out,
        "kernel_h": 0,
        "kernel_w": 0,
        "out_h": 0,
        "out_w": 0,
        "stride": 1,
        "padding": 0,
        "predecessors": [str(p) for p in preds],
    }


def _conv_out(size, k, stride, padding):
    return (size + 2 * padding - k) // stride + 1


def vgg_chain(plan, resolution=224, num_classes=1000, hidden=(4096, 4096),
              name="vgg-chain"):
    """Conv/pool chain with torchvision feature indexing and classifier head.

    `plan` lists conv widths with "M" marking 2x2 max pools. `hidden` sizes
    the classifier's intermediate linear layers; empty means one linear
    named "classifier", otherwise classifier.0/.3/.6 style indexing.
    """
    layers = [_plain("input", "input", 0, 3, ())]
    prev, prev_w, size, idx = "input", 3, resolution, 0
    for item in plan:
        if item == "M":
            size = _conv_out(size, 2, 2, 0)
            idx += 1
            continue
        width = int(item)
        lname = f"features.{idx}"
        size = _conv_out(size, 3, 1, 1)
        layers.append(_conv(lname, prev_w, width, 3, size, preds=[prev]))
        prev, prev_w = lname, width
        idx += 2  # conv then its activation

    flat = prev_w * size * size
    if hidden:
        dims = [flat, *hidden, num_classes]
        for i in range(len(dims) - 1):
            lname = f"classifier.{3 * i}"
            layers.append(_plain(lname, "linear", dims[i], dims[i + 1], [prev]))
            prev = lname
    else:
        layers.append(_plain("classifier", "linear", flat, num_classes, [prev]))
        prev = "classifier"
    layers.append(_plain("output", "output", num_classes, num_classes, [prev]))
    return ArchTemplate(name=name, family="vgg-chain", layers=layers, conv_bias=True)


def vgg_template(depth=16, resolution=224, num_classes=1000, hidden=(4096, 4096)):
    if depth not in _VGG_PLANS:
        raise MappingError(f"unsupported vgg depth {depth}, expected one of "
                           f"{sorted(_VGG_PLANS)}")
    return vgg_chain(_VGG_PLANS[depth], resolution, num_classes, hidden,
                     name=f"vgg{depth}")


def _basic_block(layers, base, in_w, width, stride, size, spine):
    size = _conv_out(size, 3, stride, 1)
    layers.append(_conv(f"{base}.conv1", in_w, width, 3, size, stride=stride,
                        preds=[spine]))
    layers.append(_bn(f"{base}.bn1", width, f"{base}.conv1"))
    layers.append(_conv(f"{base}.conv2", width, width, 3, size,
                        preds=[f"{base}.bn1"]))
    layers.append(_bn(f"{base}.bn2", width, f"{base}.conv2"))
    return f"{base}.bn2", width, size


def _bottleneck_block(layers, base, in_w, width, stride, size, spine):
    out_w = width * 4
    layers.append(_conv(f"{base}.conv1", in_w, width, 1, size, padding=0,
                        preds=[spine]))
    layers.append(_bn(f"{base}.bn1", width, f"{base}.conv1"))
    size = _conv_out(size, 3, stride, 1)
    layers.append(_conv(f"{base}.conv2", width, width, 3, size, stride=stride,
                        preds=[f"{base}.bn1"]))
    layers.append(_bn(f"{base}.bn2", width, f"{base}.conv2"))
    layers.append(_conv(f"{base}.conv3", width, out_w, 1, size, padding=0,
                        preds=[f"{base}.bn2"]))
    layers.append(_bn(f"{base}.bn3", out_w, f"{base}.conv3"))
    return f"{base}.bn3", out_w, size


def _residual_stages(layers, block_fn, stage_widths, counts, spine, spine_w, size):
    for stage, width in enumerate(stage_widths, start=1):
        for b in range(counts[stage - 1]):
            base = f"layer{stage}.{b}"
            stride = 2 if stage > 1 and b == 0 else 1
            entry_size = size
            branch_end, out_w, size = block_fn(
                layers, base, spine_w, width, stride, size, spine
            )
            if stride != 1 or spine_w != out_w:
                layers.append(_conv(f"{base}.downsample.0", spine_w, out_w, 1,
                                    _conv_out(entry_size, 1, stride, 0),
                                    stride=stride, padding=0, preds=[spine]))
                layers.append(_bn(f"{base}.downsample.1", out_w,
                                  f"{base}.downsample.0"))
                shortcut = f"{base}.downsample.1"
            else:
                shortcut = spine
            layers.append(_plain(f"{base}.add", "add", out_w, out_w,
                                 [branch_end, shortcut]))
            spine, spine_w = f"{base}.add", out_w
    return spine, spine_w


def resnet_cifar_template(depth=20, resolution=32, num_classes=10):
    """Small-image residual stack: 3x3 stem, 3 stages at widths 16/32/64."""
    if depth < 8 or (depth - 2) % 6 != 0:
        raise MappingError(f"depth must be 6n+2, got {depth}")
    blocks = (depth - 2) // 6
    layers = [_plain("input", "input", 0, 3, ())]
    size = _conv_out(resolution, 3, 1, 1)
    layers.append(_conv("conv1", 3, 16, 3, size, preds=["input"]))
    layers.append(_bn("bn1", 16, "conv1"))
    spine, spine_w = _residual_stages(
        layers, _basic_block, (16, 32, 64), (blocks,) * 3, "bn1", 16, size
    )
    layers.append(_plain("fc", "linear", spine_w, num_classes, [spine]))
    layers.append(_plain("output", "output", num_classes, num_classes, ["fc"]))
    return ArchTemplate(name=f"resnet{depth}", family="resnet-basic", layers=layers)


def resnet_imagenet_template(depth=18, resolution=224, num_classes=1000):
    """Large-image residual stack: 7x7 stem plus pool, 4 stages from width 64."""
    if depth not in _RESNET_IMAGENET_PLANS:
        raise MappingError(f"unsupported resnet depth {depth}, expected one of "
                           f"{sorted(_RESNET_IMAGENET_PLANS)}")
    block, counts = _RESNET_IMAGENET_PLANS[depth]
    block_fn = _basic_block if block == "basic" else _bottleneck_block
    layers = [_plain("input", "input", 0, 3, ())]
    size = _conv_out(resolution, 7, 2, 3)
    layers.append(_conv("conv1", 3, 64, 7, size, stride=2, padding=3,
                        preds=["input"]))
    layers.append(_bn("bn1", 64, "conv1"))
    size = _conv_out(size, 3, 2, 1)  # stem max pool, a spatial-only step
    spine, spine_w = _residual_stages(
        layers, block_fn, (64, 128, 256, 512), counts, "bn1", 64, size
    )
    layers.append(_plain("fc", "linear", spine_w, num_classes, [spine]))
    layers.append(_plain("output", "output", num_classes, num_classes, ["fc"]))
    family = "resnet-basic" if block == "basic" else "resnet-bottleneck"
    return ArchTemplate(name=f"resnet{depth}", family=family, layers=layers)


def make_template(spec, resolution=None, num_classes=None, hidden=None):
    """Build a template from a CLI-style spec string.

    Accepts vggN, resnetN, or "chain:8,M,16" for a custom conv/pool plan.
    Unset knobs fall back to the family's customary values.
    """
    if spec.startswith("chain:"):
        plan = tuple(
            tok if tok == "M" else int(tok)
            for tok in spec[len("chain:"):].split(",")
            if tok
        )
        if not plan:
            raise MappingError("empty chain plan")
        return vgg_chain(
            plan,
            resolution=resolution or 32,
            num_classes=num_classes or 10,
            hidden=tuple(hidden) if hidden else (),
            name=spec,
        )
    if spec.startswith("vgg"):
        return vgg_template(
            depth=int(spec[3:]),
            resolution=resolution or 224,
            num_classes=num_classes or 1000,
            hidden=tuple(hidden) if hidden is not None else (4096, 4096),
        )
    if spec.startswith("resnet"):
        depth = int(spec[6:])
        if depth in _RESNET_IMAGENET_PLANS:
            return resnet_imagenet_template(
                depth, resolution=resolution or 224, num_classes=num_classes or 1000
            )
        return resnet_cifar_template(
            depth, resolution=resolution or 32, num_classes=num_classes or 10
        )
    raise MappingError(f"unknown template spec {spec!r}")
