import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavecs.dwt import MultiIndex, inverse_dwt
from wavecs.errors import DimensionError, ParameterError
from wavecs.harness import (
    Experiment,
    MetricsReport,
    add_noise,
    compare_schemes,
    compare_trials,
    evaluate,
    hard_threshold_denoise,
    heavisine,
    lambda_grid,
    noise_sigma,
    psnr,
    rmse,
    run_experiment,
    runge,
    subsample,
    support_overlap,
    synth_tree_signal,
    synthetic_image,
)
from wavecs.tree import InequalityReport, is_closed_tree


class TestSignals:
    def test_runge_endpoints_and_peak(self):
        f = runge(1024)
        assert f[0] == pytest.approx(1 / 26) and f[-1] == pytest.approx(1 / 26)
        assert f.max() <= 1.0 and f.max() > 0.99

    def test_heavisine_slope_away_from_jumps(self):
        N = 1024
        f = heavisine(N)
        t = np.arange(N) / N
        jump = np.zeros(N - 1, dtype=bool)
        for c in (0.3, 0.72):
            jump |= (t[:-1] < c) & (t[1:] >= c) | (t[:-1] <= c) & (t[1:] > c)
        steps = np.abs(np.diff(f))
        assert np.all(steps[~jump] <= 16 * math.pi / N * (1 + 1e-9))
        assert np.all(np.abs(steps[jump]) > 1.0)

    def test_runge_formula(self):
        x = np.linspace(-1, 1, 256)
        np.testing.assert_allclose(runge(256), 1 / (1 + 25 * x * x), rtol=1e-15)
        assert 1 / (1 + 25 * 0.0**2) == 1.0

    def test_non_dyadic_rejected(self):
        with pytest.raises(ParameterError):
            heavisine(1000)

    @pytest.mark.parametrize("name", ["blocks", "smooth", "texture"])
    def test_images(self, name):
        img = synthetic_image(name, 32, 1)
        assert img.shape == (32, 32) and img.min() >= 0 and img.max() <= 255
        np.testing.assert_array_equal(img, synthetic_image(name, 32, 1))


class TestSynthTree:
    def test_default_scale_is_closed_tree(self):
        signal, coeffs, tree = synth_tree_signal(90, 9, 1, 7)
        assert signal.shape == (512,)
        assert len(tree) == 90 and is_closed_tree(tree.nodes)
        nz = np.flatnonzero(coeffs.values)
        assert len(nz) == 90
        positions = {coeffs.index_map.position_of(nu) for nu in tree.nodes}
        assert set(nz.tolist()) == positions
        np.testing.assert_allclose(inverse_dwt(coeffs), signal)

    def test_deterministic(self):
        a = synth_tree_signal(30, 7, 1, 3)
        b = synth_tree_signal(30, 7, 1, 3)
        np.testing.assert_array_equal(a[0], b[0])

    def test_single_node(self):
        _, coeffs, tree = synth_tree_signal(1, 6, 1, 0)
        assert tree.nodes == {MultiIndex.wavelet(0, 0)}
        assert np.count_nonzero(coeffs.values) == 1
        assert coeffs.values[1] != 0

    def test_two_dimensional(self):
        signal, coeffs, tree = synth_tree_signal(20, 4, 2, 0)
        assert signal.shape == (16, 16) and np.count_nonzero(coeffs.values) == 20


class TestSampling:
    def test_fraction_and_count(self):
        x = np.arange(100.0)
        assert subsample(x, 0.25, 0).m == 25
        assert subsample(x, 10, 0).m == 10
        assert subsample(x, 1.0, 0).m == 100

    def test_eighty_of_1024(self):
        a = subsample(runge(1024), 80, 5)
        assert a.m == 80 and np.unique(a.indices).size == 80
        np.testing.assert_array_equal(a.indices, subsample(runge(1024), 80, 5).indices)

    def test_values_and_sorting(self):
        x = np.arange(64.0) ** 2
        ms = subsample(x, 20, 1)
        assert np.all(np.diff(ms.indices) > 0)
        np.testing.assert_array_equal(ms.values, x[ms.indices])

    @pytest.mark.parametrize("bad", [0.0, 1.5, 0, 101])
    def test_invalid(self, bad):
        with pytest.raises(ParameterError):
            subsample(np.ones(100), bad, 0)

    def test_image_grid(self):
        ms = subsample(np.ones((8, 8, 3)), 0.5, 0, ndim=2)
        assert ms.m == 32 and ms.values.shape == (32, 3)


class TestNoise:
    def test_zero_sigma(self):
        x = np.arange(8.0)
        np.testing.assert_array_equal(add_noise(x, 0.0, seed=1), x)

    def test_target_psnr(self):
        f = heavisine(1024)
        noisy = add_noise(f, seed=0, psnr=26.0184)
        assert 25.5 <= psnr(f, noisy) <= 26.5

    def test_sigma_formula(self):
        assert noise_sigma(20.0, 255.0) == pytest.approx(25.5)

    def test_deterministic(self):
        f = runge(64)
        np.testing.assert_array_equal(add_noise(f, 0.1, seed=4), add_noise(f, 0.1, seed=4))

    def test_exactly_one_level(self):
        with pytest.raises(ParameterError):
            add_noise(np.ones(4))
        with pytest.raises(ParameterError):
            add_noise(np.ones(4), 0.1, psnr=20)


class TestMetrics:
    def test_examples(self):
        ref = np.array([1.0, 2.0, 3.0, 4.0])
        rep = evaluate(ref, ref)
        assert rep.rmse == 0 and math.isinf(rep.psnr) and rep.perfect
        rep = evaluate(np.ones(5), np.zeros(5), peak=1.0)
        assert rep.rmse == 1.0 and rep.psnr == 0.0
        rep = evaluate(ref, ref + np.array([1.0, -1.0, 1.0, -1.0]))
        assert rep.rmse == 1.0
        assert rep.psnr == pytest.approx(20 * math.log10(4.0))

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 10**6), n=st.integers(1, 200), peak=st.floats(0.1, 1e3))
    def test_formula_oracle(self, seed, n, peak):
        rng = np.random.default_rng(seed)
        a, b = rng.standard_normal((2, n))
        mse = sum((x - y) ** 2 for x, y in zip(a, b)) / n
        assert abs(rmse(a, b) - math.sqrt(mse)) <= 1e-12 * max(1.0, math.sqrt(mse))
        assert abs(psnr(a, b, peak) - 10 * math.log10(peak**2 / mse)) <= 1e-9

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            rmse(np.ones(3), np.ones(4))

    def test_support_overlap(self):
        t = np.array([1.0, 0.5, 0.0, 0.0])
        assert support_overlap(t, np.array([1.0, 0.0, 0.3, 0.0])) == 0.5
        assert support_overlap(np.zeros(4), np.ones(4)) == 1.0
        rep = evaluate(np.zeros(4), np.zeros(4), t, t)
        assert rep.support_overlap == 1.0 and rep.coef_error_l2 == 0.0

    def test_report_validation(self):
        with pytest.raises(ParameterError):
            MetricsReport(0.0, 1.0, 1.0, support_overlap=1.5)
        row = MetricsReport(1.0, 2.0, 3.0, scheme="norm", extra={"iterations": 7}).as_row()
        assert row["scheme"] == "norm" and row["iterations"] == 7


class TestBaselines:
    def test_lambda_grid(self):
        # the first point sits one step below lam_max, where the solution is already zero
        np.testing.assert_allclose(lambda_grid(1.0, 3), [0.1, 0.01, 0.001])
        assert len(lambda_grid(2.0, 2, 4)) == 8

    def test_hard_threshold_improves_noisy_signal(self):
        f = heavisine(1024)
        noisy = add_noise(f, seed=1, psnr=26.0)
        assert psnr(f, hard_threshold_denoise(noisy, "db3")) > psnr(f, noisy)


SMALL = {
    "synth_tree": {"J": 6, "s": 12, "m": 40},
    "inpaint_1d": {"N": 128, "m": 48},
    "denoise_1d": {"N": 128},
    "inpaint_2d": {"size": 16, "fraction": 0.4},
    "denoise_2d": {"size": 16},
    "mmv_inpaint": {"N": 64, "m": 32, "s": 12, "k": 2},
    "framelet_inpaint": {"N": 32, "m": 16, "patch_len": 4},
}


class TestExperiments:
    def test_unknown_kind(self):
        with pytest.raises(ParameterError):
            Experiment("nonsense")

    def test_streams_are_independent_and_reproducible(self):
        e = Experiment("synth_tree", 5)
        assert e.rng(1).integers(1 << 30) == Experiment("synth_tree", 5).rng(1).integers(1 << 30)
        assert e.rng(1).integers(1 << 30) != e.rng(2).integers(1 << 30)
        assert e.with_seed(6).params == e.params

    @pytest.mark.parametrize("kind", sorted(SMALL))
    def test_every_kind_runs(self, kind):
        res = run_experiment(Experiment(kind, 0, SMALL[kind]), ["none", "norm"])
        labels = [r.scheme for r in res.rows]
        assert any(lab.startswith("none") for lab in labels) and any(lab.startswith("norm") for lab in labels)
        for r in res.rows:
            assert np.isfinite(r.rmse)
        if kind.startswith("denoise"):
            assert "hard_threshold" in labels

    def test_single_scheme_single_row(self):
        rows = compare_schemes(Experiment("synth_tree", 0, SMALL["synth_tree"]), ["wrw"])
        assert len(rows) == 1 and rows[0].scheme == "wrw"

    def test_schemes_share_the_mask(self):
        exp = Experiment("inpaint_1d", 2, SMALL["inpaint_1d"])
        res = run_experiment(exp, ["none", "norm", "alpha:2"])
        ref = res.reference
        ms = subsample(ref, 48, exp.rng(1))
        for rec in res.reconstructions.values():
            # every scheme was fitted to the same sample positions
            assert np.max(np.abs(rec[ms.indices] - ref[ms.indices])) < 0.5

    def test_deterministic_rows(self):
        exp = Experiment("synth_tree", 3, SMALL["synth_tree"])
        a = [r.as_row() for r in compare_schemes(exp, ["none", "irw"])]
        b = [r.as_row() for r in compare_schemes(exp, ["none", "irw"])]
        assert a == b

    def test_trials_in_workers_match_serial(self):
        exp = Experiment("synth_tree", 1, SMALL["synth_tree"])
        serial = compare_trials(exp, ["none", "norm"], 2)
        pooled = compare_trials(exp, ["none", "norm"], 2, workers=2)
        assert [r.as_row() for r in serial] == [r.as_row() for r in pooled]
        assert [r.seed for r in serial] == [1, 1, 2, 2]

    def test_tree_stats_report(self):
        rep = run_experiment(Experiment("tree_stats", 0, {"J": 4, "s_max": 8}))
        assert isinstance(rep, InequalityReport) and rep.all_pass
        with pytest.raises(ParameterError):
            compare_schemes(Experiment("tree_stats"), ["none"])
