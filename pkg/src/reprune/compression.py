"""Propagate keep decisions through the model graph and count the savings.

A pruning plan fixes, for every parameterized layer, which output channels
survive; input channels then follow structurally: a layer keeps exactly the
input channels its producer kept as outputs. Normalization layers pass their
producer's channels through; classifier layers expand channel keeps to
flattened-feature keeps; add nodes require all incoming branches to agree.

Residual spines -- maximal groups of add nodes connected through identity
branches or shared feeding convs -- are resolved as one unit, in one of two
modes:

  - "protect" (default): unless every conv feeding the spine already keeps
    the same set, all of them are forced to keep everything. Identity
    shortcuts stay untouched; only inner layers shrink.
  - "union": every conv feeding the spine keeps the union of their elected
    sets, so residual ends prune too.

A spine fed by something that cannot be sliced at all (the network input, a
classifier) is pinned to full width in both modes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .container import LayerSpec, ModelSnapshot, TensorRecord, filters_of
from .criteria import Criterion, select_by_criterion
from .election import LayerElection
from .errors import (
    AddConflictError,
    GraphError,
    KeepOutOfRangeError,
    ShapeMismatchError,
)

ADD_MODES = ("protect", "union")


@dataclass
class PruningPlan:
    """Kept output/input channel indices per layer, plus provenance."""

    per_layer: dict[str, dict]
    source: Criterion
    lam: float = 0.0

    def to_dict(self) -> dict:
        return {
            "criterion": self.source.kind,
            "lambda": self.lam,
            "per_layer": {
                name: {
                    "kept_out": list(entry["kept_out"]),
                    "kept_in": list(entry["kept_in"]),
                }
                for name, entry in self.per_layer.items()
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PruningPlan":
        return cls(
            per_layer={
                name: {
                    "kept_out": [int(i) for i in entry["kept_out"]],
                    "kept_in": [int(i) for i in entry["kept_in"]],
                }
                for name, entry in d["per_layer"].items()
            },
            source=Criterion(kind=d.get("criterion", "reprune")),
            lam=float(d.get("lambda", 0.0)),
        )


@dataclass
class LayerCost:
    flops: int
    params: int


@dataclass
class CostReport:
    """FLOPs/parameter tallies for one model state."""

    per_layer: dict[str, LayerCost]
    total_flops: int
    total_params: int


@dataclass
class CompressionReport:
    """Before/after cost comparison, layer by layer."""

    per_layer: dict[str, dict]
    total: dict[str, int]
    reduction: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "per_layer": self.per_layer,
            "total": self.total,
            "reduction": self.reduction,
        }


def _layers_of(model) -> list[LayerSpec]:
    if isinstance(model, ModelSnapshot):
        return model.layers
    return list(model)


def _toposort(layers: list[LayerSpec]) -> list[LayerSpec]:
    by_name = {s.name: s for s in layers}
    for s in layers:
        for p in s.predecessors:
            if p not in by_name:
                raise GraphError(
                    f"layer {s.name!r} references missing producer {p!r}"
                )
    remaining = {s.name: len(s.predecessors) for s in layers}
    consumers: dict[str, list[LayerSpec]] = {s.name: [] for s in layers}
    for s in layers:
        for p in s.predecessors:
            consumers[p].append(s)
    ready = [s for s in layers if remaining[s.name] == 0]
    out: list[LayerSpec] = []
    while ready:
        spec = ready.pop(0)
        out.append(spec)
        for nxt in consumers[spec.name]:
            remaining[nxt.name] -= 1
            if remaining[nxt.name] == 0:
                ready.append(nxt)
    if len(out) != len(layers):
        raise GraphError("layer graph has a cycle")
    return out


def _through_batchnorm(spec: LayerSpec, by_name: dict[str, LayerSpec]) -> LayerSpec:
    """Walk upstream through normalization layers to the node that sets channels."""
    node = spec
    while node.kind == "batchnorm" and len(node.predecessors) == 1:
        node = by_name[node.predecessors[0]]
    return node


def _resolve_add_targets(layers, order, width, kept_out, add_mode):
    """Channel set for every add node; forces feeding convs as a side effect."""
    by_name = {s.name: s for s in layers}
    adds = [s for s in order if s.kind == "add"]
    parent = {a.name: a.name for a in adds}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        parent[find(x)] = find(y)

    terminals: dict[str, set] = {a.name: set() for a in adds}
    pinned: set = set()
    for a in adds:
        for p in a.predecessors:
            node = _through_batchnorm(by_name[p], by_name)
            if node.kind == "conv":
                terminals[a.name].add(node.name)
            elif node.kind == "add":
                union(a.name, node.name)
            else:  # input, linear: a branch nothing can slice
                pinned.add(a.name)

    owner: dict[str, str] = {}
    for a in adds:
        for t in terminals[a.name]:
            if t in owner:
                union(a.name, owner[t])
            else:
                owner[t] = a.name

    comp_terms: dict[str, list] = {}
    comp_pinned: set = set()
    for a in adds:
        root = find(a.name)
        comp_terms.setdefault(root, [])
        comp_terms[root].extend(terminals[a.name])
        if a.name in pinned:
            comp_pinned.add(root)

    targets: dict[str, list[int]] = {}
    for a in adds:
        root = find(a.name)
        if root in targets:
            continue
        w = width[root]
        terms = sorted(set(comp_terms[root]))
        if root in comp_pinned or not terms:
            target = list(range(w))
        elif add_mode == "union":
            target = sorted(set().union(*(kept_out[t] for t in terms)))
        else:
            distinct = {tuple(kept_out[t]) for t in terms}
            target = list(distinct.pop()) if len(distinct) == 1 else list(range(w))
        targets[root] = target
        for t in terms:
            kept_out[t] = list(target)
    return {a.name: targets[find(a.name)] for a in adds}


def _plan_from_kept(layers, kept_out, source, lam, add_mode) -> PruningPlan:
    if add_mode not in ADD_MODES:
        raise ValueError(f"add_mode must be one of {ADD_MODES}")
    layers = list(layers)
    by_name = {s.name: s for s in layers}
    kept_out = {k: sorted(int(i) for i in v) for k, v in kept_out.items()}
    for name, kept in kept_out.items():
        spec = by_name[name]
        if not kept or kept[0] < 0 or kept[-1] >= spec.n_out:
            raise KeepOutOfRangeError(
                f"layer {name!r}: kept indices outside [0, {spec.n_out - 1}]"
            )

    order = _toposort(layers)

    width: dict[str, int] = {}
    for spec in order:
        if spec.kind in ("input", "conv", "linear"):
            width[spec.name] = spec.n_out
        elif spec.kind == "add":
            widths = {width[p] for p in spec.predecessors}
            if len(widths) != 1:
                raise AddConflictError(
                    f"add node {spec.name!r} joins branches of unequal width "
                    f"{sorted(widths)}"
                )
            width[spec.name] = widths.pop()
        else:
            if len(spec.predecessors) != 1:
                raise GraphError(
                    f"layer {spec.name!r} ({spec.kind}) must have exactly one producer"
                )
            width[spec.name] = width[spec.predecessors[0]]

    add_targets = _resolve_add_targets(layers, order, width, kept_out, add_mode)

    channels: dict[str, list[int]] = {}
    for spec in order:
        if spec.kind == "input":
            channels[spec.name] = list(range(spec.n_out))
        elif spec.kind == "conv":
            channels[spec.name] = kept_out[spec.name]
        elif spec.kind == "linear":
            channels[spec.name] = list(range(spec.n_out))
        elif spec.kind == "add":
            channels[spec.name] = add_targets[spec.name]
        else:
            channels[spec.name] = channels[spec.predecessors[0]]

    per_layer: dict[str, dict] = {}
    for spec in layers:
        if spec.kind == "conv":
            if spec.predecessors:
                kept_in = list(channels[spec.predecessors[0]])
            else:
                kept_in = list(range(spec.n_in))
            per_layer[spec.name] = {
                "kept_out": kept_out[spec.name],
                "kept_in": kept_in,
            }
        elif spec.kind == "batchnorm":
            ch = list(channels[spec.predecessors[0]]) if spec.predecessors else list(
                range(spec.n_out)
            )
            per_layer[spec.name] = {"kept_out": ch, "kept_in": list(ch)}
        elif spec.kind == "linear":
            if spec.predecessors:
                p = spec.predecessors[0]
                w = width[p]
                if w <= 0 or spec.n_in % w != 0:
                    raise GraphError(
                        f"linear layer {spec.name!r}: n_in={spec.n_in} is not a "
                        f"multiple of producer width {w}"
                    )
                s = spec.n_in // w
                kept_in = [c * s + r for c in channels[p] for r in range(s)]
            else:
                kept_in = list(range(spec.n_in))
            per_layer[spec.name] = {
                "kept_out": list(range(spec.n_out)),
                "kept_in": kept_in,
            }
    return PruningPlan(per_layer=per_layer, source=source, lam=lam)


def build_plan(
    model,
    elections: dict[str, LayerElection],
    protected: tuple[str, ...] = (),
    add_mode: str = "protect",
    lam: float = 0.0,
    source: Criterion | None = None,
) -> PruningPlan:
    """Turn per-layer elections into a structurally consistent plan.

    Every conv layer needs either an election or a spot on the protected
    list (protected layers keep all filters).
    """
    layers = _layers_of(model)
    protected = set(protected)
    kept: dict[str, list[int]] = {}
    for spec in layers:
        if spec.kind != "conv":
            continue
        if spec.name in protected:
            kept[spec.name] = list(range(spec.n_out))
        elif spec.name in elections:
            kept[spec.name] = list(elections[spec.name].kept)
        elif spec.n_out < 2:
            kept[spec.name] = list(range(spec.n_out))  # nothing to cluster
        else:
            raise GraphError(
                f"conv layer {spec.name!r} has no election and is not protected"
            )
    return _plan_from_kept(
        layers, kept, source or Criterion(kind="reprune"), lam, add_mode
    )


def plan_from_counts(
    snapshot: ModelSnapshot,
    counts: dict[str, int],
    criterion: Criterion,
    protected: tuple[str, ...] = (),
    add_mode: str = "protect",
    lam: float = 0.0,
) -> PruningPlan:
    """Baseline plan: each conv keeps `counts[name]` filters by `criterion`."""
    protected = set(protected)
    kept: dict[str, list[int]] = {}
    for spec in snapshot.conv_layers():
        if spec.name in protected:
            kept[spec.name] = list(range(spec.n_out))
            continue
        if spec.name not in counts:
            raise GraphError(f"no keep count for conv layer {spec.name!r}")
        kept[spec.name] = select_by_criterion(
            filters_of(snapshot, spec.name), criterion, counts[spec.name]
        )
    return _plan_from_kept(snapshot.layers, kept, criterion, lam, add_mode)


def plan_from_ratios(
    model,
    keep_ratio: float,
    add_mode: str = "protect",
) -> PruningPlan:
    """Synthetic plan keeping the first round(n_out * ratio) filters per conv.

    Which indices are kept does not matter for cost accounting; this exists
    to build cost fixtures at a prescribed compression level without weights.
    """
    if not 0.0 < keep_ratio <= 1.0:
        raise ValueError("keep_ratio must be in (0, 1]")
    layers = _layers_of(model)
    kept = {}
    for spec in layers:
        if spec.kind == "conv":
            count = min(spec.n_out, max(1, round(spec.n_out * keep_ratio)))
            kept[spec.name] = list(range(count))
    return _plan_from_kept(layers, kept, Criterion(kind="reprune"), 0.0, add_mode)


def apply_plan_to_specs(model, plan: PruningPlan) -> list[LayerSpec]:
    """Pruned layer descriptions (widths only, no weights)."""
    layers = _layers_of(model)
    out: list[LayerSpec] = []
    new_width: dict[str, int] = {}
    for spec in layers:
        new = LayerSpec.from_dict(spec.to_dict())
        entry = plan.per_layer.get(spec.name)
        if entry is not None:
            if spec.kind in ("conv", "linear"):
                new.n_out = len(entry["kept_out"])
                new.n_in = len(entry["kept_in"])
            elif spec.kind == "batchnorm":
                new.n_out = new.n_in = len(entry["kept_out"])
        elif spec.kind in ("add", "output") and spec.predecessors:
            widths = {new_width[p] for p in spec.predecessors if new_width.get(p)}
            if len(widths) == 1 and spec.n_out:
                new.n_out = new.n_in = widths.pop()
        new_width[spec.name] = new.n_out
        out.append(new)
    return out


def _sliced(record: TensorRecord, rows, cols=None) -> np.ndarray:
    data = record.data[np.asarray(rows, dtype=np.int64)]
    if cols is not None:
        data = data[:, np.asarray(cols, dtype=np.int64)]
    return data


def apply_plan(snapshot: ModelSnapshot, plan: PruningPlan) -> ModelSnapshot:
    """Slice every tensor down to the plan's kept channels."""
    for name, entry in plan.per_layer.items():
        spec = snapshot.layer(name)
        if entry["kept_out"] and (
            entry["kept_out"][0] < 0 or entry["kept_out"][-1] >= spec.n_out
        ):
            raise KeepOutOfRangeError(
                f"layer {name!r}: kept_out outside [0, {spec.n_out - 1}]"
            )
        if spec.kind in ("conv", "linear") and entry["kept_in"]:
            if entry["kept_in"][0] < 0 or entry["kept_in"][-1] >= spec.n_in:
                raise ShapeMismatchError(
                    f"layer {name!r}: kept_in outside [0, {spec.n_in - 1}]"
                )

    by_name = {s.name: s for s in snapshot.layers}
    tensors: dict[str, TensorRecord] = {}
    for tname, rec in snapshot.tensors.items():
        layer_name = tname.rsplit(".", 1)[0] if "." in tname else ""
        entry = plan.per_layer.get(layer_name)
        if entry is None or layer_name not in by_name:
            tensors[tname] = TensorRecord(name=tname, data=rec.data.copy())
            continue
        spec = by_name[layer_name]
        if spec.kind in ("conv", "linear") and tname == layer_name + ".weight":
            data = _sliced(rec, entry["kept_out"], entry["kept_in"])
        else:
            # bias and normalization vectors follow the kept outputs
            data = _sliced(rec, entry["kept_out"])
        tensors[tname] = TensorRecord(name=tname, data=data)

    pruned = ModelSnapshot(
        layers=apply_plan_to_specs(snapshot.layers, plan),
        tensors=tensors,
        metadata=dict(snapshot.metadata),
    )
    pruned.validate()
    return pruned


def count_flops(model) -> CostReport:
    """Multiply-accumulate and parameter tallies, one MAC = 1 FLOP.

    Convs cost n_out * n_in * kh * kw per output position; linear layers cost
    n_out * n_in; everything else is free. Parameters count weight elements,
    plus bias and normalization scale-and-shift vectors when the model
    carries tensors (running statistics are buffers, not parameters; layer
    lists without tensors count weights only, normalization at 2 per channel).
    """
    layers = _layers_of(model)
    tensors = model.tensors if isinstance(model, ModelSnapshot) else None
    per_layer: dict[str, LayerCost] = {}
    for spec in layers:
        flops = 0
        params = 0
        if spec.kind == "conv":
            if spec.out_h < 1 or spec.out_w < 1:
                raise GraphError(
                    f"conv layer {spec.name!r} is missing its output spatial size"
                )
            flops = (
                spec.n_out * spec.n_in * spec.kernel_h * spec.kernel_w
                * spec.out_h * spec.out_w
            )
            params = spec.n_out * spec.n_in * spec.kernel_h * spec.kernel_w
            if tensors is not None and f"{spec.name}.bias" in tensors:
                params += spec.n_out
        elif spec.kind == "linear":
            flops = spec.n_out * spec.n_in
            params = spec.n_out * spec.n_in
            if tensors is None or f"{spec.name}.bias" in tensors:
                params += spec.n_out
        elif spec.kind == "batchnorm":
            if tensors is None:
                params = 2 * spec.n_out
            else:
                for suffix in (".weight", ".bias"):
                    if spec.name + suffix in tensors:
                        params += spec.n_out
        per_layer[spec.name] = LayerCost(flops=flops, params=params)
    return CostReport(
        per_layer=per_layer,
        total_flops=sum(c.flops for c in per_layer.values()),
        total_params=sum(c.params for c in per_layer.values()),
    )


def compression_report(before, after) -> CompressionReport:
    """Layer-by-layer and total cost comparison of two model states."""
    layers_b = _layers_of(before)
    layers_a = _layers_of(after)
    if [(s.name, s.kind) for s in layers_b] != [(s.name, s.kind) for s in layers_a]:
        raise GraphError("model topologies differ; nothing to compare")
    cost_b = count_flops(before)
    cost_a = count_flops(after)
    per_layer: dict[str, dict] = {}
    for sb, sa in zip(layers_b, layers_a):
        entry = {
            "kind": sb.kind,
            "flops_before": cost_b.per_layer[sb.name].flops,
            "flops_after": cost_a.per_layer[sa.name].flops,
            "params_before": cost_b.per_layer[sb.name].params,
            "params_after": cost_a.per_layer[sa.name].params,
        }
        if sb.kind == "conv":
            entry["filters_before"] = sb.n_out
            entry["filters_after"] = sa.n_out
            entry["remaining_ratio"] = sa.n_out / sb.n_out if sb.n_out else 0.0
        per_layer[sb.name] = entry
    total = {
        "flops_before": cost_b.total_flops,
        "flops_after": cost_a.total_flops,
        "params_before": cost_b.total_params,
        "params_after": cost_a.total_params,
    }
    reduction = {
        "flops": 1.0 - (total["flops_after"] / total["flops_before"])
        if total["flops_before"]
        else 0.0,
        "params": 1.0 - (total["params_after"] / total["params_before"])
        if total["params_before"]
        else 0.0,
    }
    return CompressionReport(per_layer=per_layer, total=total, reduction=reduction)
