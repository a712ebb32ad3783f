"""Post-pruning diagnostics and parameter sweeps.

Two report families: cosine similarity between the filters a plan kept and
the same slots after external fine-tuning (how far did training move the
survivors), and sweeps that rerun the election across a list of minimum
cluster rates to chart remaining-filter ratios against cost reduction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .compression import (
    PruningPlan,
    apply_plan_to_specs,
    build_plan,
    compression_report,
    count_flops,
)
from .container import ModelSnapshot
from .election import ElectionConfig, elect_model
from .errors import ShapeMismatchError

HISTOGRAM_BINS = 20  # fixed 0.1-wide bins spanning [-1, 1]


def cosine_similarity(before, after) -> float:
    """Cosine of the angle between two filters; 0 when either is all-zero."""
    a = np.asarray(before, dtype=np.float64).ravel()
    b = np.asarray(after, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ShapeMismatchError(
            f"filter lengths differ: {a.shape[0]} vs {b.shape[0]}"
        )
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


@dataclass
class SimilarityReport:
    """Per-filter cosines between kept weights and their fine-tuned versions."""

    per_layer: dict[str, list[float]]
    values: np.ndarray
    histogram: np.ndarray
    bin_edges: np.ndarray
    mean: float
    zero_norm_count: int = 0
    summary: dict[str, float] = field(default_factory=dict)

    def fraction_in(self, lo: float, hi: float) -> float:
        if self.values.size == 0:
            return 0.0
        inside = (self.values >= lo) & (self.values <= hi)
        return float(inside.mean())

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "count": int(self.values.size),
            "zero_norm_count": self.zero_norm_count,
            "summary": dict(self.summary),
            "histogram": {
                "bin_edges": self.bin_edges.tolist(),
                "counts": self.histogram.tolist(),
            },
            "per_layer": {k: list(v) for k, v in self.per_layer.items()},
        }


def similarity_report(
    before: ModelSnapshot, after: ModelSnapshot, plan: PruningPlan
) -> SimilarityReport:
    """Compare the filters `plan` kept in `before` against `after`, slot by slot.

    `after` must have exactly the pruned shapes the plan produces;
    correspondence is positional (kept index order survives fine-tuning).
    """
    per_layer: dict[str, list[float]] = {}
    values: list[float] = []
    zero_norms = 0
    for spec in before.conv_layers():
        entry = plan.per_layer.get(spec.name)
        if entry is None:
            continue
        kept_out = np.asarray(entry["kept_out"], dtype=np.int64)
        kept_in = np.asarray(entry["kept_in"], dtype=np.int64)
        w_before = before.weight(spec.name).data[kept_out][:, kept_in]
        w_after = after.weight(spec.name).data
        if w_after.shape != w_before.shape:
            raise ShapeMismatchError(
                f"layer {spec.name!r}: pruned shape {w_before.shape} vs "
                f"fine-tuned shape {w_after.shape}"
            )
        sims = []
        for i in range(w_before.shape[0]):
            va, vb = w_before[i].ravel(), w_after[i].ravel()
            if not va.any() or not vb.any():
                zero_norms += 1
            sims.append(cosine_similarity(va, vb))
        per_layer[spec.name] = sims
        values.extend(sims)

    arr = np.clip(np.asarray(values, dtype=np.float64), -1.0, 1.0)
    edges = np.linspace(-1.0, 1.0, HISTOGRAM_BINS + 1)
    counts, _ = np.histogram(arr, bins=edges)
    report = SimilarityReport(
        per_layer=per_layer,
        values=arr,
        histogram=counts,
        bin_edges=edges,
        mean=float(arr.mean()) if arr.size else 0.0,
        zero_norm_count=zero_norms,
    )
    report.summary = {
        "fraction_near_zero": report.fraction_in(-0.1, 0.1),
        "fraction_mid": report.fraction_in(0.2, 0.6),
    }
    return report


def lambda_sweep(
    snapshot: ModelSnapshot,
    lambdas,
    protected: tuple[str, ...] = (),
    add_mode: str = "protect",
) -> dict:
    """Election outcomes across minimum cluster rates.

    Returns {"rows": per-(lambda, conv-layer) remaining-filter records,
    "totals": per-lambda FLOPs/params reduction}. Accuracy columns live with
    whoever fine-tunes; this table is the engine-side half.
    """
    rows = []
    totals = []
    base = count_flops(snapshot)
    for lam in lambdas:
        config = ElectionConfig(lam=float(lam))
        elections = elect_model(snapshot, config, protected=protected)
        plan = build_plan(
            snapshot, elections, protected=protected, add_mode=add_mode, lam=float(lam)
        )
        pruned_specs = apply_plan_to_specs(snapshot, plan)
        cost = count_flops(pruned_specs)
        for spec in snapshot.conv_layers():
            kept = len(plan.per_layer[spec.name]["kept_out"])
            rows.append(
                {
                    "lambda": float(lam),
                    "layer": spec.name,
                    "n_out": spec.n_out,
                    "kept": kept,
                    "remaining_ratio": kept / spec.n_out,
                }
            )
        totals.append(
            {
                "lambda": float(lam),
                "flops_reduction": 1.0 - cost.total_flops / base.total_flops,
                "params_reduction": 1.0 - cost.total_params / base.total_params,
            }
        )
    return {"rows": rows, "totals": totals}
