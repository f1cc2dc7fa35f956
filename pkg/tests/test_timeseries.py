import math

import numpy as np
import pytest

from specfreq import (
    EmptyInput,
    FrequencySet,
    IndexSet,
    InsufficientLength,
    InvalidParameter,
    NonFiniteValue,
    NonNumericValue,
    RaggedInput,
    TimePanel,
    autocov,
    difference,
    parse_csv,
)

import oracles


class TestParseCsv:
    def test_plain_body(self):
        panel = parse_csv("1,2\n3,4\n5,6\n7,8\n")
        assert (panel.n, panel.p) == (4, 2)
        assert panel.labels == ("s1", "s2")

    def test_header_detected(self):
        panel = parse_csv("gdp,hires\n1,2\n3,4\n5,6\n")
        assert panel.labels == ("gdp", "hires")
        assert panel.n == 3

    def test_explicit_header_flag(self):
        panel = parse_csv("1,2\n3,4\n5,6\n7,8\n", has_header=True)
        assert panel.labels == ("1", "2")
        assert panel.n == 3

    def test_nan_rejected(self):
        with pytest.raises(NonFiniteValue):
            parse_csv("1,2\nNaN,4\n5,6\n")

    def test_inf_rejected(self):
        with pytest.raises(NonFiniteValue):
            parse_csv("1,2\ninf,4\n5,6\n")

    def test_empty_rejected(self):
        with pytest.raises(EmptyInput):
            parse_csv("")
        with pytest.raises(EmptyInput):
            parse_csv("a,b\n")

    def test_ragged_rejected(self):
        with pytest.raises(RaggedInput):
            parse_csv("1,2\n3\n5,6\n")

    def test_non_numeric_body_rejected(self):
        with pytest.raises(NonNumericValue):
            parse_csv("1,2\n3,x\n5,6\n", has_header=False)

    def test_too_short_rejected(self):
        with pytest.raises(InsufficientLength):
            parse_csv("1,2\n3,4\n")


class TestTimePanel:
    def test_min_rows(self):
        with pytest.raises(InsufficientLength):
            TimePanel(values=np.ones((2, 2)), labels=("a", "b"))

    def test_nonfinite(self):
        bad = np.ones((4, 2))
        bad[1, 1] = np.inf
        with pytest.raises(NonFiniteValue):
            TimePanel(values=bad, labels=("a", "b"))

    def test_values_frozen(self):
        panel = TimePanel(values=np.ones((4, 2)), labels=("a", "b"))
        with pytest.raises(ValueError):
            panel.values[0, 0] = 7.0


class TestDifference:
    def test_regular(self):
        panel = TimePanel(values=np.array([1.0, 3.0, 6.0, 10.0]).reshape(-1, 1), labels=("x",))
        out = difference(panel, "regular")
        assert np.array_equal(out.values.ravel(), [2.0, 3.0, 4.0])

    def test_seasonal(self):
        panel = TimePanel(values=np.arange(1.0, 8.0).reshape(-1, 1), labels=("x",))
        out = difference(panel, "seasonal", period=4)
        assert np.array_equal(out.values.ravel(), [4.0, 4.0, 4.0])

    def test_too_short(self):
        panel = TimePanel(values=np.arange(3.0).reshape(-1, 1), labels=("x",))
        with pytest.raises(InsufficientLength):
            difference(panel, "seasonal", period=4)

    def test_bad_period(self):
        panel = TimePanel(values=np.arange(9.0).reshape(-1, 1), labels=("x",))
        with pytest.raises(InvalidParameter):
            difference(panel, "seasonal", period=1)

    def test_twice_regular_is_second_difference(self, rng):
        values = rng.normal(size=(20, 2))
        panel = TimePanel(values=values, labels=("a", "b"))
        twice = difference(difference(panel, "regular"), "regular")
        direct = values[2:] - 2 * values[1:-1] + values[:-2]
        assert np.allclose(twice.values, direct, atol=1e-14)


class TestAutocov:
    def test_constant_panel_vanishes(self):
        panel = TimePanel(values=np.full((6, 2), 3.5), labels=("a", "b"))
        acov = autocov(panel, 2)
        assert np.all(acov.gamma == 0.0)

    def test_alternating_series(self):
        panel = TimePanel(values=np.array([1.0, -1.0, 1.0, -1.0]).reshape(-1, 1), labels=("x",))
        acov = autocov(panel, 1)
        assert acov.at(0)[0, 0] == pytest.approx(1.0, abs=1e-15)
        assert acov.at(1)[0, 0] == pytest.approx(-0.75, abs=1e-15)

    def test_negative_lag_is_exact_transpose(self, small_panel):
        acov = autocov(small_panel, 4)
        for k in range(1, 5):
            assert np.array_equal(acov.at(-k), acov.at(k).T)

    def test_lag_zero_psd(self, small_panel):
        acov = autocov(small_panel, 1)
        g0 = acov.at(0)
        assert np.allclose(g0, g0.T, atol=1e-12)
        assert np.linalg.eigvalsh((g0 + g0.T) / 2).min() >= -1e-10

    def test_shift_invariance(self, rng):
        values = rng.normal(size=(30, 3))
        shifted = values + np.array([5.0, -2.0, 100.0])
        a1 = autocov(TimePanel(values=values, labels=("a", "b", "c")), 3)
        a2 = autocov(TimePanel(values=shifted, labels=("a", "b", "c")), 3)
        assert np.allclose(a1.gamma, a2.gamma, atol=1e-12)

    def test_matches_literal_sum(self, rng):
        values = rng.normal(size=(15, 3))
        panel = TimePanel(values=values, labels=("a", "b", "c"))
        acov = autocov(panel, 4)
        for k in range(-4, 5):
            for i in range(3):
                for j in range(3):
                    assert acov.at(k)[i, j] == pytest.approx(
                        oracles.autocov_entry(values, i, j, k), abs=1e-12
                    )

    def test_lag_bound(self, small_panel):
        with pytest.raises(InsufficientLength):
            autocov(small_panel, small_panel.n)

    def test_pair_sequence(self, small_panel):
        acov = autocov(small_panel, 2)
        seq = acov.pair_sequence(2, 3)
        expected = [acov.at(k)[1, 2] for k in range(-2, 3)]
        assert np.array_equal(seq, expected)


class TestIndexSet:
    def test_distinct_required(self):
        with pytest.raises(InvalidParameter):
            IndexSet(((1, 2), (1, 2)))

    def test_bounds(self):
        pairs = IndexSet(((1, 3),))
        with pytest.raises(InvalidParameter):
            pairs.validate_for(2)
        pairs.validate_for(3)

    def test_one_based(self):
        with pytest.raises(InvalidParameter):
            IndexSet(((0, 1),))

    def test_all_offdiagonal_count(self):
        assert IndexSet.all_offdiagonal(5).r == 10

    def test_diagonal(self):
        assert IndexSet.diagonal(3).pairs == ((1, 1), (2, 2), (3, 3))

    def test_block(self):
        pairs = IndexSet.block([1, 2], [3, 4])
        assert pairs.pairs == ((1, 3), (1, 4), (2, 3), (2, 4))


class TestFrequencySet:
    def test_discrete_rejects_pi(self):
        with pytest.raises(InvalidParameter):
            FrequencySet.discrete([0.0, math.pi])

    def test_discrete_rejects_unsorted(self):
        with pytest.raises(InvalidParameter):
            FrequencySet.discrete([0.5, 0.25])

    def test_discrete_evaluate(self):
        fs = FrequencySet.quarterly()
        assert np.array_equal(fs.evaluate(100), [-math.pi, -math.pi / 2, 0.0, math.pi / 2])
        assert fs.m_j(100) == 4

    def test_monthly_preset(self):
        fs = FrequencySet.monthly()
        grid = fs.evaluate(50)
        assert grid.size == 12
        assert grid[0] == -math.pi
        assert grid[-1] == pytest.approx(5 * math.pi / 6)

    def test_interval_inclusive(self):
        fs = FrequencySet.from_interval(-1.0, 1.0, grid_points=5)
        assert np.allclose(fs.evaluate(100), [-1.0, -0.5, 0.0, 0.5, 1.0])
        assert fs.m_j(100) == 100

    def test_interval_halfopen_at_pi(self):
        fs = FrequencySet.from_interval(0.0, math.pi, grid_points=4)
        grid = fs.evaluate(100)
        assert grid.size == 4
        assert grid.max() < math.pi

    def test_interval_default_grid(self):
        fs = FrequencySet.from_interval(-1.0, 1.0)
        assert fs.evaluate(100).size == 100
        assert fs.evaluate(10_000).size == 512

    def test_interval_bounds(self):
        with pytest.raises(InvalidParameter):
            FrequencySet.from_interval(-4.0, 1.0)
        with pytest.raises(InvalidParameter):
            FrequencySet.from_interval(1.0, 1.0)
