"""Similarity diagnostics and cluster-rate sweeps."""

import numpy as np
import pytest

from reprune.analysis import (
    cosine_similarity,
    lambda_sweep,
    similarity_report,
)
from reprune.compression import apply_plan, build_plan
from reprune.container import TensorRecord
from reprune.election import ElectionConfig, elect_model
from reprune.errors import ShapeMismatchError
from reprune.zoo import conv_chain


def pruned_pair(seed=3, lam=0.2):
    snap = conv_chain(widths=(8, 16, 12), seed=seed)
    elections = elect_model(snap, ElectionConfig(lam=lam))
    plan = build_plan(snap, elections, lam=lam)
    return snap, apply_plan(snap, plan), plan


class TestCosine:
    def test_reference_values(self):
        assert cosine_similarity([1.0, 0.0], [0.0, 1.0]) == pytest.approx(0.0)
        assert cosine_similarity([1.0, 2.0], [2.0, 4.0]) == pytest.approx(1.0)
        assert cosine_similarity([1.0, 0.0], [-1.0, 0.0]) == pytest.approx(-1.0)
        assert cosine_similarity([3.0, 4.0], [4.0, 3.0]) == pytest.approx(24.0 / 25.0)

    def test_zero_vector_scores_zero(self):
        assert cosine_similarity([0.0, 0.0], [1.0, 2.0]) == 0.0

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            cosine_similarity([1.0, 2.0], [1.0, 2.0, 3.0])

    def test_scale_invariant(self, rng):
        a = rng.normal(size=20)
        b = rng.normal(size=20)
        assert cosine_similarity(a, b) == pytest.approx(
            cosine_similarity(a * 7.5, b * 0.01), abs=1e-12
        )


class TestSimilarityReport:
    def test_identical_weights_score_one(self, backend):
        before, pruned, plan = pruned_pair()
        report = similarity_report(before, pruned, plan)
        np.testing.assert_allclose(report.values, 1.0, atol=1e-7)
        assert report.mean == pytest.approx(1.0, abs=1e-7)
        n_kept = sum(
            len(entry["kept_out"])
            for name, entry in plan.per_layer.items()
            if before.layer(name).kind == "conv"
        )
        assert report.values.size == n_kept

    def test_histogram_covers_unit_interval_in_20_bins(self, backend):
        before, pruned, plan = pruned_pair()
        report = similarity_report(before, pruned, plan)
        assert report.histogram.shape == (20,)
        np.testing.assert_allclose(report.bin_edges, np.linspace(-1, 1, 21))
        assert report.histogram.sum() == report.values.size
        assert report.histogram[-1] == report.values.size  # everything at 1.0

    def test_fraction_windows(self):
        from reprune.analysis import SimilarityReport

        values = np.array([-0.05, 0.0, 0.05, 0.3, 0.5, 0.9])
        edges = np.linspace(-1, 1, 21)
        counts, _ = np.histogram(values, bins=edges)
        report = SimilarityReport(
            per_layer={}, values=values, histogram=counts, bin_edges=edges,
            mean=float(values.mean()),
        )
        assert report.fraction_in(-0.1, 0.1) == pytest.approx(3 / 6)
        assert report.fraction_in(0.2, 0.6) == pytest.approx(2 / 6)

    def test_perturbed_weights_drop_below_one(self, backend, rng):
        before, pruned, plan = pruned_pair()
        noisy = apply_plan(before, plan)
        for name, rec in noisy.tensors.items():
            if name.endswith(".weight"):
                noise = rng.normal(size=rec.data.shape).astype(np.float32)
                noisy.tensors[name] = TensorRecord(
                    name=name, data=rec.data + 0.5 * np.abs(rec.data).mean() * noise
                )
        report = similarity_report(before, noisy, plan)
        assert 0.0 < report.mean < 1.0

    def test_positional_correspondence(self, backend):
        # swapping two kept rows must lower exactly those two cosines
        before, pruned, plan = pruned_pair()
        name = "features.1.weight"
        swapped = apply_plan(before, plan)
        data = swapped.tensors[name].data.copy()
        data[[0, 1]] = data[[1, 0]]
        swapped.tensors[name] = TensorRecord(name=name, data=data)
        report = similarity_report(before, swapped, plan)
        sims = np.asarray(report.per_layer["features.1"])
        assert sims[0] < 0.99 and sims[1] < 0.99
        np.testing.assert_allclose(sims[2:], 1.0, atol=1e-7)

    def test_shape_mismatch_rejected(self, backend):
        before, _, plan = pruned_pair()
        with pytest.raises(ShapeMismatchError):
            similarity_report(before, before, plan)

    def test_zero_norm_counted(self, backend):
        before, pruned, plan = pruned_pair()
        name = "features.0.weight"
        zeroed = apply_plan(before, plan)
        data = zeroed.tensors[name].data.copy()
        data[0] = 0.0
        zeroed.tensors[name] = TensorRecord(name=name, data=data)
        report = similarity_report(before, zeroed, plan)
        assert report.zero_norm_count == 1
        assert report.per_layer["features.0"][0] == 0.0


class TestLambdaSweep:
    def test_row_count_is_lambdas_times_convs(self, backend):
        snap = conv_chain(widths=(6, 9, 7), seed=3)
        result = lambda_sweep(snap, [0.1, 0.5, 0.9])
        assert len(result["rows"]) == 3 * 3
        assert len(result["totals"]) == 3
        for row in result["rows"]:
            assert 0.0 < row["remaining_ratio"] <= 1.0
            assert row["kept"] <= row["n_out"]

    def test_full_rate_prunes_almost_nothing(self, backend):
        snap = conv_chain(widths=(8, 16, 12), seed=3)
        result = lambda_sweep(snap, [1.0])
        for row in result["rows"]:
            assert row["kept"] >= row["n_out"] - 2
        assert result["totals"][0]["flops_reduction"] < 0.5

    def test_higher_rate_prunes_less(self, backend):
        snap = conv_chain(widths=(8, 16, 12), seed=3)
        result = lambda_sweep(snap, [0.1, 0.9])
        by_lam = {t["lambda"]: t for t in result["totals"]}
        assert by_lam[0.9]["flops_reduction"] < by_lam[0.1]["flops_reduction"]

    def test_protected_layers_stay_full(self, backend):
        snap = conv_chain(widths=(6, 9), seed=2)
        result = lambda_sweep(snap, [0.2], protected=("features.0",))
        row = next(r for r in result["rows"] if r["layer"] == "features.0")
        assert row["kept"] == row["n_out"]
