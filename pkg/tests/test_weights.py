import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavecs.dwt import CoefficientVector, IndexMap
from wavecs.errors import ParameterError
from wavecs.weights import (
    SchemeSpec,
    WeightVector,
    alpha_weights,
    irw_update,
    scheme_weights,
    uniform_norm_weights,
    unweighted,
    wavelet_rw_update,
)


def weight_at_level(w, imap, level):
    sel = (imap.levels == level) & ~imap.is_scaling
    vals = np.unique(w.values[sel])
    assert vals.size == 1
    return vals[0]


class TestUniformNorm:
    def test_level_zero(self):
        imap = IndexMap((16,), 4)
        assert weight_at_level(uniform_norm_weights(imap), imap, 0) == 1.0

    def test_level_three_1d(self):
        imap = IndexMap((16,), 4)
        assert weight_at_level(uniform_norm_weights(imap), imap, 3) == pytest.approx(2.828427, abs=1e-6)

    def test_level_two_2d(self):
        imap = IndexMap((8, 8), 3)
        assert weight_at_level(uniform_norm_weights(imap), imap, 2) == 4.0

    def test_scaling_weight(self):
        imap = IndexMap((16,), 4)
        assert uniform_norm_weights(imap).values[0] == 1.0


class TestAlpha:
    def test_alpha_one_is_uniform_norm(self):
        imap = IndexMap((64,), 6)
        np.testing.assert_array_equal(alpha_weights(imap, 1.0).values, uniform_norm_weights(imap).values)

    def test_alpha_two_level_three(self):
        imap = IndexMap((16,), 4)
        assert weight_at_level(alpha_weights(imap, 2.0), imap, 3) == pytest.approx(8.0)

    def test_alpha_half_level_four(self):
        imap = IndexMap((32,), 5)
        assert weight_at_level(alpha_weights(imap, 0.5), imap, 4) == pytest.approx(2.0)

    @pytest.mark.parametrize("alpha", [0.0, -1.0])
    def test_nonpositive_alpha(self, alpha):
        with pytest.raises(ParameterError):
            alpha_weights(IndexMap((8,), 3), alpha)


class TestIRW:
    def test_zero_coefficient(self):
        assert irw_update(np.zeros(1), 0.1).values[0] == pytest.approx(10.0)

    def test_large_coefficient(self):
        assert irw_update(np.array([0.9]), 0.1).values[0] == pytest.approx(1.0)

    def test_elementwise(self):
        c = np.random.default_rng(0).standard_normal(50)
        np.testing.assert_allclose(irw_update(c, 0.1).values, 1.0 / (np.abs(c) + 0.1), rtol=1e-15)

    def test_row_norms_for_matrices(self):
        c = np.array([[3.0, 4.0], [0.0, 0.0]])
        np.testing.assert_allclose(irw_update(c, 1.0).values, [1 / 6, 1.0])

    @pytest.mark.parametrize("eps", [0.0, -0.5])
    def test_bad_eps(self, eps):
        with pytest.raises(ParameterError):
            irw_update(np.zeros(3), eps)


class TestWaveletRW:
    @pytest.mark.parametrize("shape,depth", [((16,), 4), ((256,), 8), ((16, 16), 4), ((64, 64), 6)])
    def test_first_iteration_equals_base(self, shape, depth):
        imap = IndexMap(shape, depth)
        base = uniform_norm_weights(imap)
        w = wavelet_rw_update(np.zeros(imap.size), base, imap)
        np.testing.assert_allclose(w.values, base.values, rtol=0, atol=1e-12)

    def test_hand_evaluated_value(self):
        imap = IndexMap((16,), 4)
        base = uniform_norm_weights(imap)
        c = np.zeros(16)
        p = imap.position_of(imap.index_of(8))  # level 3, shift 0
        c[p] = 1.0
        w = wavelet_rw_update(c, base, imap).values[p]
        eps = 1.0 / (2**1.5 - 2.0)
        assert w == pytest.approx(2.0 + 1.0 / (1.0 + eps), abs=1e-12)
        assert w == pytest.approx(2.45304, abs=1e-4)

    def test_large_coefficients_approach_parent_weight(self):
        imap = IndexMap((64,), 6)
        base = uniform_norm_weights(imap)
        w = wavelet_rw_update(np.full(64, 1e9), base, imap).values
        parent_w = base.values[imap.parent_positions]
        wav = ~imap.is_scaling
        # coarsest wavelets sit next to the scaling root and keep their base weight
        expected = np.where(imap.levels == 0, base.values, parent_w)
        np.testing.assert_allclose(w[wav], expected[wav], atol=1e-6)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10**6), scale=st.floats(1e-3, 1e3), d=st.sampled_from([1, 2]))
    def test_never_below_parent_weight(self, seed, scale, d):
        imap = IndexMap((32,) * d, 5)
        base = uniform_norm_weights(imap)
        c = scale * np.random.default_rng(seed).standard_normal(imap.size)
        w = wavelet_rw_update(c, base, imap).values
        wav = ~imap.is_scaling
        assert np.all(w[wav] >= base.values[imap.parent_positions[wav]] - 1e-12)
        assert np.all(w[wav] <= base.values[wav] + 1e-12)

    def test_scaling_weights_untouched(self):
        imap = IndexMap((32,), 3)
        base = uniform_norm_weights(imap)
        c = np.random.default_rng(1).standard_normal(32)
        w = wavelet_rw_update(CoefficientVector(c, imap, "haar"), base).values
        np.testing.assert_array_equal(w[imap.is_scaling], base.values[imap.is_scaling])

    def test_needs_index_map_for_arrays(self):
        imap = IndexMap((8,), 3)
        with pytest.raises(ParameterError):
            wavelet_rw_update(np.zeros(8), uniform_norm_weights(imap))


class TestSchemes:
    @pytest.mark.parametrize(
        "text,name,alpha",
        [("none", "none", 1.0), ("norm", "norm", 1.0), ("alpha:2", "alpha", 2.0), ("irw", "irw", 1.0), ("wrw", "wrw", 1.0)],
    )
    def test_parse(self, text, name, alpha):
        spec = SchemeSpec.parse(text)
        assert spec.name == name and spec.alpha == alpha

    @pytest.mark.parametrize("text", ["alpha:0", "alpha:x", "l2", ""])
    def test_parse_errors(self, text):
        with pytest.raises(ParameterError):
            SchemeSpec.parse(text)

    def test_initial_weights(self):
        imap = IndexMap((32,), 5)
        assert np.all(scheme_weights(SchemeSpec.parse("none"), imap).values == 1)
        np.testing.assert_allclose(scheme_weights(SchemeSpec.parse("wrw"), imap).values,
                                   uniform_norm_weights(imap).values)
        np.testing.assert_allclose(scheme_weights(SchemeSpec.parse("irw"), imap).values, 10.0)
        assert math.isclose(scheme_weights(SchemeSpec.parse("alpha:2"), imap).values[-1], 2.0**4)

    def test_weight_vector_validation(self):
        with pytest.raises(ParameterError):
            WeightVector(np.array([1.0, 0.0]), "x")
        with pytest.raises(ParameterError):
            WeightVector(np.array([1.0, np.inf]), "x")
        assert len(unweighted(IndexMap((8,), 3))) == 8


@pytest.mark.parametrize("scheme", ["irw", "wrw"])
def test_larger_magnitude_gives_smaller_weight(scheme):
    imap = IndexMap((64,), 6)
    base = uniform_norm_weights(imap)
    mags = np.linspace(0.0, 5.0, 11)
    for level in range(1, 6):
        p = int(np.flatnonzero((imap.levels == level) & ~imap.is_scaling)[0])
        ws = []
        for a in mags:
            c = np.zeros(64)
            c[p] = a
            w = irw_update(c, 0.1) if scheme == "irw" else wavelet_rw_update(c, base, imap)
            ws.append(w.values[p])
        assert np.all(np.diff(ws) < 0)
        if scheme == "wrw":
            assert min(ws) > base.values[imap.parent_positions[p]]
