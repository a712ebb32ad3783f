"""Checkpoint-to-container conversion in both directions.

Export walks the template's layer graph, pulls each parameter from the
checkpoint by name, and validates structure as it goes: kernel sizes match
the template, every conv's input width equals its producer's output width,
residual branches agree, and the classifier's flatten factor is consistent.
Channel widths themselves come from the checkpoint, so a checkpoint saved
from a pruned (and fine-tuned) model exports just as well as the original.

Import is the reverse: container tensors become a framework state dict,
with integer step counters restored from container metadata.
"""

from __future__ import annotations

from collections import OrderedDict
from copy import deepcopy

import numpy as np
import torch

from .errors import MappingError, ShapeError
from .fpwt import Container, read_fpwt, write_fpwt
from .templates import ArchTemplate


def _listing(names, limit=8):
    shown = ", ".join(sorted(names)[:limit])
    extra = len(names) - min(len(names), limit)
    return shown + (f", ... {extra} more" if extra > 0 else "")


def load_checkpoint(path) -> dict:
    """Read a checkpoint file into a flat name->tensor mapping."""
    loaded = torch.load(path, map_location="cpu", weights_only=True)
    if isinstance(loaded, dict) and "state_dict" in loaded:
        loaded = loaded["state_dict"]
    if not isinstance(loaded, dict):
        raise MappingError(f"checkpoint holds {type(loaded).__name__}, "
                           "expected a state dict")
    return loaded


def _checkpoint_array(name, tensor) -> np.ndarray:
    if not isinstance(tensor, torch.Tensor):
        raise MappingError(f"checkpoint entry {name!r} is not a tensor")
    if tensor.dtype != torch.float32:
        raise MappingError(
            f"checkpoint tensor {name!r} is {tensor.dtype}, only float32 "
            "round-trips bit-exactly"
        )
    return np.ascontiguousarray(tensor.detach().cpu().numpy())


def export_state_dict(state_dict: dict, template: ArchTemplate) -> Container:
    """Build a container from an in-memory state dict."""
    float_names = [name for name, _ in template.float_parameters()]
    int_names = template.int_buffers()
    known = set(float_names) | set(int_names)

    missing = [n for n in float_names if n not in state_dict]
    if missing:
        raise MappingError(f"checkpoint is missing {len(missing)} expected "
                           f"parameter(s): {_listing(missing)}")
    unmapped = [n for n in state_dict if n not in known]
    if unmapped:
        raise MappingError(f"template maps no layer onto {len(unmapped)} "
                           f"checkpoint parameter(s): {_listing(unmapped)}")

    arrays = {name: _checkpoint_array(name, state_dict[name]) for name in float_names}

    # widths come from the checkpoint; the template pins everything else
    layers = deepcopy(template.layers)
    template_dims = {s["name"]: (s["n_in"], s["n_out"]) for s in template.layers}
    width: dict[str, int] = {}
    for spec in layers:
        name, kind = spec["name"], spec["kind"]
        preds = spec["predecessors"]
        if kind == "input":
            width[name] = spec["n_out"]
            continue
        in_w = width[preds[0]]
        if kind == "conv":
            w = arrays[f"{name}.weight"]
            if w.ndim != 4:
                raise ShapeError(f"{name}.weight has {w.ndim} dims, expected 4")
            if (w.shape[2], w.shape[3]) != (spec["kernel_h"], spec["kernel_w"]):
                raise ShapeError(
                    f"{name}.weight kernel is {w.shape[2]}x{w.shape[3]}, template "
                    f"says {spec['kernel_h']}x{spec['kernel_w']}"
                )
            if w.shape[1] != in_w:
                raise ShapeError(f"{name} takes {w.shape[1]} channels but its "
                                 f"producer {preds[0]} emits {in_w}")
            if template.conv_bias and arrays[f"{name}.bias"].shape != (w.shape[0],):
                raise ShapeError(f"{name}.bias does not match {w.shape[0]} filters")
            spec["n_in"], spec["n_out"] = int(w.shape[1]), int(w.shape[0])
            width[name] = int(w.shape[0])
        elif kind == "batchnorm":
            for part in ("weight", "bias", "running_mean", "running_var"):
                vec = arrays[f"{name}.{part}"]
                if vec.shape != (in_w,):
                    raise ShapeError(f"{name}.{part} has shape {vec.shape}, "
                                     f"expected ({in_w},)")
            spec["n_in"] = spec["n_out"] = in_w
            width[name] = in_w
        elif kind == "add":
            other = width[preds[1]]
            if in_w != other:
                raise ShapeError(f"{name} joins branches of widths {in_w} and "
                                 f"{other}")
            spec["n_in"] = spec["n_out"] = in_w
            width[name] = in_w
        elif kind == "linear":
            w = arrays[f"{name}.weight"]
            if w.ndim != 2:
                raise ShapeError(f"{name}.weight has {w.ndim} dims, expected 2")
            t_in, _ = template_dims[name]
            t_prev_out = template_dims[preds[0]][1]
            factor = t_in // t_prev_out  # spatial block size at the flatten
            if w.shape[1] != in_w * factor:
                raise ShapeError(
                    f"{name} takes {w.shape[1]} features but its producer "
                    f"emits {in_w} channels x {factor} positions"
                )
            if arrays[f"{name}.bias"].shape != (w.shape[0],):
                raise ShapeError(f"{name}.bias does not match {w.shape[0]} outputs")
            spec["n_in"], spec["n_out"] = int(w.shape[1]), int(w.shape[0])
            width[name] = int(w.shape[0])
        elif kind == "output":
            spec["n_in"] = spec["n_out"] = in_w
            width[name] = in_w

    int_buffers = {}
    for name in int_names:
        if name in state_dict:
            int_buffers[name] = int(state_dict[name].item())

    metadata = {
        "arch": template.name,
        "family": template.family,
        "int_buffers": int_buffers,
    }
    tensors = OrderedDict((name, arrays[name]) for name in float_names)
    return Container(layers=layers, tensors=tensors, metadata=metadata)


def export(checkpoint_path, template: ArchTemplate, out_path) -> Container:
    """Checkpoint file -> FPWT file. Returns the written container."""
    container = export_state_dict(load_checkpoint(checkpoint_path), template)
    write_fpwt(container, out_path)
    return container


def _validate_container_shapes(container: Container) -> None:
    for spec in container.layers:
        name, kind = spec["name"], spec["kind"]
        if kind == "conv":
            expected = (spec["n_out"], spec["n_in"], spec["kernel_h"],
                        spec["kernel_w"])
            _require_shape(container, f"{name}.weight", expected)
        elif kind == "linear":
            _require_shape(container, f"{name}.weight",
                           (spec["n_out"], spec["n_in"]))
        elif kind == "batchnorm":
            for part in ("weight", "bias", "running_mean", "running_var"):
                _require_shape(container, f"{name}.{part}", (spec["n_out"],))


def _require_shape(container: Container, tensor_name, expected):
    arr = container.tensors.get(tensor_name)
    if arr is None:
        raise ShapeError(f"container is missing tensor {tensor_name!r}")
    if arr.shape != tuple(expected):
        raise ShapeError(f"{tensor_name} has shape {arr.shape}, the layer "
                         f"graph declares {tuple(expected)}")


def import_pruned(container, template: ArchTemplate) -> "OrderedDict[str, torch.Tensor]":
    """Container (path or parsed) -> framework state dict, counters restored."""
    if not isinstance(container, Container):
        container = read_fpwt(container)
    _validate_container_shapes(container)

    float_names = [name for name, _ in template.float_parameters()]
    present = set(container.tensors)
    missing = [n for n in float_names if n not in present]
    if missing:
        raise MappingError(f"container is missing {len(missing)} expected "
                           f"tensor(s): {_listing(missing)}")
    extra = [n for n in present if n not in set(float_names)]
    if extra:
        raise MappingError(f"template maps no parameter onto {len(extra)} "
                           f"container tensor(s): {_listing(extra)}")

    int_buffers = container.metadata.get("int_buffers", {})
    state_dict: OrderedDict[str, torch.Tensor] = OrderedDict()
    for spec in template.layers:
        name, kind = spec["name"], spec["kind"]
        if kind == "conv":
            parts = ["weight"] + (["bias"] if template.conv_bias else [])
        elif kind == "linear":
            parts = ["weight", "bias"]
        elif kind == "batchnorm":
            parts = ["weight", "bias", "running_mean", "running_var"]
        else:
            continue
        for part in parts:
            arr = container.tensors[f"{name}.{part}"]
            state_dict[f"{name}.{part}"] = torch.from_numpy(arr.copy())
        if kind == "batchnorm":
            counter = f"{name}.num_batches_tracked"
            state_dict[counter] = torch.tensor(
                int(int_buffers.get(counter, 0)), dtype=torch.int64
            )
    return state_dict


def import_pruned_file(container_path, template: ArchTemplate, out_path) -> None:
    torch.save(import_pruned(container_path, template), out_path)


def layer_widths(container) -> dict[str, dict[str, int]]:
    """Conv/linear widths declared by a container's layer graph."""
    if not isinstance(container, Container):
        container = read_fpwt(container)
    return {
        spec["name"]: {"n_in": spec["n_in"], "n_out": spec["n_out"]}
        for spec in container.layers
        if spec["kind"] in ("conv", "linear")
    }
