import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mfxwt.config import AnalysisConfig
from mfxwt.errors import ShapeMismatch, ShiftOutOfRange
from mfxwt.surrogates import (
    SurrogateKind,
    SurrogateReport,
    make_surrogate,
    replicate_rng,
    shift_scan,
    surrogate_ensemble,
)

FAST = AnalysisConfig(scale_count=10, diag_step=1.0)


@pytest.fixture(scope="module")
def series():
    rng = np.random.default_rng(21)
    x = rng.standard_normal(1024)
    y = 0.7 * x + 0.3 * rng.standard_normal(1024)
    return x, y


def circular_acf(v):
    f = np.fft.rfft(v - v.mean())
    return np.fft.irfft(np.abs(f) ** 2, v.size)


@pytest.mark.parametrize("kind", ["srg1", "srg2", "srg3", "srg4"])
def test_marginals_preserved(series, kind):
    x, y = series
    xs, ys = make_surrogate(x, y, kind, seed=3)
    assert np.array_equal(np.sort(xs), np.sort(x))
    assert np.array_equal(np.sort(ys), np.sort(y))


def test_which_series_moves(series):
    x, y = series
    xs, ys = make_surrogate(x, y, "srg1", seed=1)
    assert not np.array_equal(xs, x) and np.array_equal(ys, y)
    xs, ys = make_surrogate(x, y, "srg2", seed=1)
    assert np.array_equal(xs, x) and not np.array_equal(ys, y)


def test_coshuffle_keeps_pairs(series):
    x, y = series
    xs, ys = make_surrogate(x, y, SurrogateKind.SRG3, seed=5)
    assert math.fsum(xs * ys) == math.fsum(x * y)
    pairs = sorted(zip(x, y))
    assert sorted(zip(xs, ys)) == pairs


def test_coshuffle_identity_case(monkeypatch):
    import mfxwt.surrogates as srg

    class Identity:
        def permutation(self, n):
            return np.arange(n)

    monkeypatch.setattr(srg, "_rng", lambda seed: Identity())
    x = np.arange(70.0)
    y = x**2
    xs, ys = make_surrogate(x, y, "srg3", seed=0)
    assert np.array_equal(xs, x) and np.array_equal(ys, y)


def test_independent_shuffles_break_pairs(series):
    x, y = series
    xs, ys = make_surrogate(x, y, "srg4", seed=5)
    assert abs(np.corrcoef(xs, ys)[0, 1]) < 0.15


@pytest.mark.parametrize("kind", ["lead1", "lead2"])
def test_lead_preserves_acf(series, kind):
    x, y = series
    xs, ys = make_surrogate(x, y, kind, n_shift=37)
    assert np.allclose(circular_acf(xs), circular_acf(x))
    assert np.allclose(circular_acf(ys), circular_acf(y))


def test_lead_directions(series):
    x, y = series
    xs, ys = make_surrogate(x, y, "lead1", n_shift=3)
    assert np.array_equal(xs, x) and ys[0] == y[3]
    xs, ys = make_surrogate(x, y, "lead2", n_shift=3)
    assert np.array_equal(ys, y) and xs[0] == x[3]
    xs, ys = make_surrogate(x, y, "lead1", n_shift=0)
    assert np.array_equal(xs, x) and np.array_equal(ys, y)


def test_lead_range(series):
    x, y = series
    with pytest.raises(ShiftOutOfRange):
        make_surrogate(x, y, "lead1", n_shift=1024)
    with pytest.raises(ShiftOutOfRange):
        make_surrogate(x, y, "lead2", n_shift=-1)
    with pytest.raises(ShapeMismatch):
        make_surrogate(x, y[:-1], "srg1", seed=0)


def test_replicate_streams_are_order_independent():
    a = [replicate_rng(7, i).random() for i in range(5)]
    b = [replicate_rng(7, i).random() for i in reversed(range(5))][::-1]
    assert a == b and len(set(a)) == 5


def test_report_statistics():
    r = SurrogateReport("srg4", 4, [0.3, 0.1, 0.2, 0.4], observed=0.35, seed=1)
    assert list(r.widths) == [0.1, 0.2, 0.3, 0.4]
    assert r.mean == pytest.approx(0.25)
    assert r.std == pytest.approx(np.std([0.1, 0.2, 0.3, 0.4], ddof=1))
    assert r.stderr == pytest.approx(r.std / 2)
    assert r.p_value == pytest.approx(2 / 5)
    doc = json.loads(r.to_json())
    assert doc["p_value"] == pytest.approx(0.4) and doc["kind"] == "srg4"


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0, 2), min_size=1, max_size=40), st.floats(0, 2))
def test_p_value_bounds(widths, observed):
    r = SurrogateReport("srg1", len(widths), widths, observed, 0)
    assert 0 < r.p_value <= 1
    assert r.p_value == (1 + sum(w >= observed for w in widths)) / (1 + len(widths))


def test_ensemble_reproducible(series):
    x, y = series
    a = surrogate_ensemble(x, y, "srg4", 50, seed=11, config=FAST)
    b = surrogate_ensemble(x, y, "srg4", 50, seed=11, config=FAST)
    assert a.to_json() == b.to_json()
    assert np.all(a.widths >= 0) and 0 < a.p_value <= 1
    assert a.observed == pytest.approx(FAST.width(x, y))


def test_ensemble_parallel_matches_serial(series):
    x, y = series
    a = surrogate_ensemble(x, y, "srg1", 50, seed=4, config=FAST)
    b = surrogate_ensemble(x, y, "srg1", 50, seed=4, config=FAST, n_jobs=2)
    assert np.array_equal(a.widths, b.widths)


def test_lead_ensemble_uses_fixed_shifts(series):
    x, y = series
    r = surrogate_ensemble(x, y, "lead2", 50, seed=0, config=FAST)
    first = FAST.width(*make_surrogate(x, y, "lead2", n_shift=101))
    assert first in r.widths


def test_ensemble_preconditions(series):
    x, y = series
    with pytest.raises(ValueError):
        surrogate_ensemble(x, y, "srg1", 49, seed=0, config=FAST)
    with pytest.raises(ValueError):
        surrogate_ensemble(x, y, "srg1", 50, seed=None, config=FAST)
    with pytest.raises(ShiftOutOfRange):
        surrogate_ensemble(x[:128], y[:128], "lead1", 50, seed=0, config=FAST)


def test_shift_scan(series):
    x, y = series
    out = shift_scan(x, y, [1, 5, 50], FAST)
    assert out["shifts"] == [1, 5, 50]
    assert len(out["x_leads"]) == 3 and len(out["y_leads"]) == 3
    assert out["original"] == pytest.approx(FAST.width(x, y))
    with pytest.raises(ShiftOutOfRange):
        shift_scan(x, y, [103], FAST)
