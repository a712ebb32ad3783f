"""Fixture model graphs for tests, benchmarks, and CLI demos.

Builders mirror the common torchvision layouts and naming (features.N /
layerS.B.convN / fc) so containers made here line up with real checkpoints.
Pooling and activations carry no parameters and no tracked cost, so they are
not graph nodes; their effect shows up in the out_h/out_w of downstream
convs. Builders return a full ModelSnapshot when asked for weights (small
fixtures only) and a bare LayerSpec list otherwise -- wide ImageNet models
are used as cost fixtures, where materializing hundreds of megabytes of
random weights would be waste.
"""

from __future__ import annotations

import numpy as np

from .container import LayerSpec, ModelSnapshot, TensorRecord

_VGG16_PLAN = (64, 64, "M", 128, 128, "M", 256, 256, 256, "M",
               512, 512, 512, "M", 512, 512, 512, "M")


def _conv(name, n_in, n_out, k, out_hw, stride=1, padding=None, preds=()):
    return LayerSpec(
        name=name,
        kind="conv",
        n_in=n_in,
        n_out=n_out,
        kernel_h=k,
        kernel_w=k,
        out_h=out_hw,
        out_w=out_hw,
        stride=stride,
        padding=k // 2 if padding is None else padding,
        predecessors=list(preds),
    )


def _bn(name, width, pred):
    return LayerSpec(name=name, kind="batchnorm", n_in=width, n_out=width,
                     predecessors=[pred])


def _fill_weights(layers, rng, conv_bias):
    tensors = {}
    for spec in layers:
        if spec.kind == "conv":
            shape = (spec.n_out, spec.n_in, spec.kernel_h, spec.kernel_w)
            tensors[f"{spec.name}.weight"] = rng.normal(0.0, 0.1, shape)
            if conv_bias:
                tensors[f"{spec.name}.bias"] = rng.normal(0.0, 0.1, spec.n_out)
        elif spec.kind == "linear":
            tensors[f"{spec.name}.weight"] = rng.normal(0.0, 0.1, (spec.n_out, spec.n_in))
            tensors[f"{spec.name}.bias"] = rng.normal(0.0, 0.1, spec.n_out)
        elif spec.kind == "batchnorm":
            w = spec.n_out
            tensors[f"{spec.name}.weight"] = rng.normal(1.0, 0.1, w)
            tensors[f"{spec.name}.bias"] = rng.normal(0.0, 0.1, w)
            tensors[f"{spec.name}.running_mean"] = rng.normal(0.0, 0.1, w)
            tensors[f"{spec.name}.running_var"] = np.abs(rng.normal(1.0, 0.1, w)) + 0.1
    return {
        name: TensorRecord(name=name, data=np.asarray(data, dtype=np.float32))
        for name, data in tensors.items()
    }


def conv_chain(
    widths=(8, 16, 12),
    in_channels=3,
    spatial=16,
    num_classes=5,
    seed=0,
    with_weights=True,
):
    """Plain conv stack plus classifier; the smallest end-to-end fixture."""
    layers = [LayerSpec(name="input", kind="input", n_out=in_channels)]
    prev, prev_w = "input", in_channels
    for i, w in enumerate(widths):
        name = f"features.{i}"
        layers.append(_conv(name, prev_w, w, 3, spatial, preds=[prev]))
        prev, prev_w = name, w
    layers.append(LayerSpec(
        name="classifier", kind="linear", n_in=prev_w * spatial * spatial,
        n_out=num_classes, predecessors=[prev],
    ))
    layers.append(LayerSpec(name="output", kind="output",
                            n_in=num_classes, n_out=num_classes,
                            predecessors=["classifier"]))
    if not with_weights:
        return layers
    tensors = _fill_weights(layers, np.random.default_rng(seed), conv_bias=True)
    snap = ModelSnapshot(layers=layers, tensors=tensors,
                         metadata={"arch": f"conv_chain{len(widths)}"})
    snap.validate()
    return snap


def vgg16(dataset="imagenet", num_classes=None, seed=0, with_weights=False):
    """The 13-conv VGG configuration at ImageNet or CIFAR resolution."""
    if dataset == "imagenet":
        res, classes = 224, num_classes or 1000
    elif dataset in ("cifar10", "cifar100"):
        res, classes = 32, num_classes or (100 if dataset == "cifar100" else 10)
    else:
        raise ValueError(f"unknown dataset {dataset!r}")

    layers = [LayerSpec(name="input", kind="input", n_out=3)]
    prev, prev_w, hw, idx = "input", 3, res, 0
    for item in _VGG16_PLAN:
        if item == "M":
            hw //= 2
            idx += 1
            continue
        name = f"features.{idx}"
        layers.append(_conv(name, prev_w, item, 3, hw, preds=[prev]))
        prev, prev_w = name, item
        idx += 2  # conv + relu occupy two sequential slots

    if dataset == "imagenet":
        hw = 7  # adaptive pooling before the classifier
        dims = [(prev_w * hw * hw, 4096), (4096, 4096), (4096, classes)]
        for i, (n_in, n_out) in enumerate(dims):
            name = f"classifier.{3 * i}"
            layers.append(LayerSpec(name=name, kind="linear", n_in=n_in,
                                    n_out=n_out, predecessors=[prev]))
            prev = name
    else:
        layers.append(LayerSpec(name="classifier", kind="linear",
                                n_in=prev_w, n_out=classes, predecessors=[prev]))
        prev = "classifier"
    layers.append(LayerSpec(name="output", kind="output", n_in=classes,
                            n_out=classes, predecessors=[prev]))
    if not with_weights:
        return layers
    tensors = _fill_weights(layers, np.random.default_rng(seed), conv_bias=True)
    snap = ModelSnapshot(layers=layers, tensors=tensors,
                         metadata={"arch": f"vgg16-{dataset}"})
    snap.validate()
    return snap


def resnet_cifar(depth=56, num_classes=10, seed=0, with_weights=True):
    """CIFAR residual stack: 3 stages of basic blocks at widths 16/32/64.

    Stage transitions downsample the shortcut with a strided pointwise conv
    (torchvision downsample naming); all other shortcuts are identities.
    """
    if (depth - 2) % 6 != 0:
        raise ValueError("depth must be 6n+2")
    blocks = (depth - 2) // 6
    layers = [LayerSpec(name="input", kind="input", n_out=3)]
    layers.append(_conv("conv1", 3, 16, 3, 32, preds=["input"]))
    layers.append(_bn("bn1", 16, "conv1"))
    spine, spine_w = "bn1", 16

    for stage, (width, hw) in enumerate(((16, 32), (32, 16), (64, 8)), start=1):
        for b in range(blocks):
            base = f"layer{stage}.{b}"
            stride = 2 if stage > 1 and b == 0 else 1
            layers.append(_conv(f"{base}.conv1", spine_w, width, 3, hw,
                                stride=stride, preds=[spine]))
            layers.append(_bn(f"{base}.bn1", width, f"{base}.conv1"))
            layers.append(_conv(f"{base}.conv2", width, width, 3, hw,
                                preds=[f"{base}.bn1"]))
            layers.append(_bn(f"{base}.bn2", width, f"{base}.conv2"))
            if stride != 1 or spine_w != width:
                layers.append(_conv(f"{base}.downsample.0", spine_w, width, 1,
                                    hw, stride=stride, padding=0, preds=[spine]))
                layers.append(_bn(f"{base}.downsample.1", width,
                                  f"{base}.downsample.0"))
                shortcut = f"{base}.downsample.1"
            else:
                shortcut = spine
            layers.append(LayerSpec(name=f"{base}.add", kind="add", n_in=width,
                                    n_out=width,
                                    predecessors=[f"{base}.bn2", shortcut]))
            spine, spine_w = f"{base}.add", width

    layers.append(LayerSpec(name="fc", kind="linear", n_in=spine_w,
                            n_out=num_classes, predecessors=[spine]))
    layers.append(LayerSpec(name="output", kind="output", n_in=num_classes,
                            n_out=num_classes, predecessors=["fc"]))
    if not with_weights:
        return layers
    tensors = _fill_weights(layers, np.random.default_rng(seed), conv_bias=False)
    snap = ModelSnapshot(layers=layers, tensors=tensors,
                         metadata={"arch": f"resnet{depth}-cifar"})
    snap.validate()
    return snap


def resnet_imagenet(depth=18, num_classes=1000, seed=0, with_weights=False):
    """ImageNet residual stack: basic blocks (18/34) or bottlenecks (50)."""
    plans = {
        18: ("basic", (2, 2, 2, 2)),
        34: ("basic", (3, 4, 6, 3)),
        50: ("bottleneck", (3, 4, 6, 3)),
    }
    if depth not in plans:
        raise ValueError(f"unsupported depth {depth}, expected one of {sorted(plans)}")
    block, counts = plans[depth]
    expansion = 4 if block == "bottleneck" else 1

    layers = [LayerSpec(name="input", kind="input", n_out=3)]
    layers.append(_conv("conv1", 3, 64, 7, 112, stride=2, padding=3,
                        preds=["input"]))
    layers.append(_bn("bn1", 64, "conv1"))
    spine, spine_w = "bn1", 64  # max pool halves the map to 56 with no node

    for stage, (width, hw) in enumerate(
        ((64, 56), (128, 28), (256, 14), (512, 7)), start=1
    ):
        out_w = width * expansion
        for b in range(counts[stage - 1]):
            base = f"layer{stage}.{b}"
            stride = 2 if stage > 1 and b == 0 else 1
            if block == "basic":
                layers.append(_conv(f"{base}.conv1", spine_w, width, 3, hw,
                                    stride=stride, preds=[spine]))
                layers.append(_bn(f"{base}.bn1", width, f"{base}.conv1"))
                layers.append(_conv(f"{base}.conv2", width, width, 3, hw,
                                    preds=[f"{base}.bn1"]))
                layers.append(_bn(f"{base}.bn2", width, f"{base}.conv2"))
                branch_end = f"{base}.bn2"
            else:
                layers.append(_conv(f"{base}.conv1", spine_w, width, 1, hw if stride == 1 else hw * 2,
                                    padding=0, preds=[spine]))
                layers.append(_bn(f"{base}.bn1", width, f"{base}.conv1"))
                layers.append(_conv(f"{base}.conv2", width, width, 3, hw,
                                    stride=stride, preds=[f"{base}.bn1"]))
                layers.append(_bn(f"{base}.bn2", width, f"{base}.conv2"))
                layers.append(_conv(f"{base}.conv3", width, out_w, 1, hw,
                                    padding=0, preds=[f"{base}.bn2"]))
                layers.append(_bn(f"{base}.bn3", out_w, f"{base}.conv3"))
                branch_end = f"{base}.bn3"
            if stride != 1 or spine_w != out_w:
                layers.append(_conv(f"{base}.downsample.0", spine_w, out_w, 1,
                                    hw, stride=stride, padding=0, preds=[spine]))
                layers.append(_bn(f"{base}.downsample.1", out_w,
                                  f"{base}.downsample.0"))
                shortcut = f"{base}.downsample.1"
            else:
                shortcut = spine
            layers.append(LayerSpec(name=f"{base}.add", kind="add", n_in=out_w,
                                    n_out=out_w,
                                    predecessors=[branch_end, shortcut]))
            spine, spine_w = f"{base}.add", out_w

    layers.append(LayerSpec(name="fc", kind="linear", n_in=spine_w,
                            n_out=num_classes, predecessors=[spine]))
    layers.append(LayerSpec(name="output", kind="output", n_in=num_classes,
                            n_out=num_classes, predecessors=["fc"]))
    if not with_weights:
        return layers
    tensors = _fill_weights(layers, np.random.default_rng(seed), conv_bias=False)
    snap = ModelSnapshot(layers=layers, tensors=tensors,
                         metadata={"arch": f"resnet{depth}-imagenet"})
    snap.validate()
    return snap
