import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kiesmix.fitting import (
    FAMILIES,
    PENALTY,
    EmpiricalPdf,
    FitConfig,
    bin_data,
    cost_function,
    fit,
    model_from_parameters,
    objective,
    rescale_divide,
    rescale_minmax,
)
from kiesmix.laws import Degenerate, Exponential
from kiesmix.mixture import MixedKies, mix_pdf
from kiesmix.sampling import sample


def _synthetic(model, seed=11, n=100_000, m=50):
    _, emp = bin_data(sample(model, seed, n).values, m)
    return emp


class TestRescale:
    def test_minmax(self):
        np.testing.assert_array_equal(rescale_minmax([0, 3]), [0, 2 / 3])
        np.testing.assert_allclose(rescale_minmax([1, 2, 3]), [0, 1 / 3, 2 / 3], rtol=1e-15)
        out = rescale_minmax([49263, 120000, 308352])
        assert out[0] == 0.0 and out[-1] == 2 / 3

    def test_minmax_degenerate(self):
        with pytest.raises(ValueError):
            rescale_minmax([2.0, 2.0, 2.0])
        with pytest.raises(ValueError):
            rescale_minmax([1.0])

    def test_divide(self):
        np.testing.assert_allclose(rescale_divide([1, 950], 1000), [0.001, 0.95], rtol=1e-15)
        np.testing.assert_allclose(rescale_divide([500], 1000), [0.5])
        with pytest.raises(ValueError):
            rescale_divide([1000], 1000)
        with pytest.raises(ValueError):
            rescale_divide([5], 0.0)


class TestBinning:
    def test_uniform_density(self):
        x = np.random.default_rng(0).random(1_000_000)
        hist, emp = bin_data(x, 50)
        np.testing.assert_allclose(emp.values, 1.0, atol=0.05)
        assert hist.counts.sum() == hist.n_total == x.size

    def test_single_bin(self):
        _, emp = bin_data(np.full(10, 0.33), 20)
        expected = np.zeros(20)
        expected[6] = 20.0
        np.testing.assert_array_equal(emp.values, expected)

    def test_conventions(self):
        hist, emp = bin_data([0.0, 0.25, 0.5, 1.0], 4)
        np.testing.assert_array_equal(hist.counts, [1, 1, 1, 1])
        np.testing.assert_allclose(emp.centers, [0.125, 0.375, 0.625, 0.875])
        assert emp.m == 4

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=300), st.integers(2, 60))
    def test_histogram_mass(self, data, m):
        hist, emp = bin_data(data, m)
        assert hist.counts.sum() == len(data)
        np.testing.assert_allclose(emp.values.sum() / m, 1.0, atol=1e-12)
        assert np.all(np.diff(emp.centers) > 0)

    def test_errors(self):
        with pytest.raises(ValueError):
            bin_data([0.5, 1.2], 10)
        with pytest.raises(ValueError):
            bin_data([0.5], 1)
        with pytest.raises(ValueError):
            bin_data([], 10)


class TestCost:
    def test_perfect_fit(self):
        m = MixedKies(Degenerate(2.0), 1.5)
        centers = (np.arange(1, 51) - 0.5) / 50
        emp = EmpiricalPdf(centers, np.asarray(mix_pdf(m, centers)))
        assert cost_function(m, emp) == 0.0

    def test_zero_densities(self):
        # a steep model whose density underflows at every centre
        m = MixedKies(Degenerate(1e4), 20.0)
        centers = np.array([0.7, 0.8, 0.9])
        assert np.all(mix_pdf(m, centers) == 0.0)
        assert cost_function(m, EmpiricalPdf(centers, np.zeros(3))) == 0.0

    def test_value(self):
        m = MixedKies(Exponential(1.0), 1.0)
        emp = EmpiricalPdf(np.array([0.25, 0.75]), np.array([0.5, 2.0]))
        expected = abs(math.log(0.51) - math.log(1.01)) + abs(math.log(2.01) - math.log(1.01))
        np.testing.assert_allclose(cost_function(m, emp), expected, rtol=1e-14)

    def test_permutation_invariance(self):
        m = MixedKies(Degenerate(2.0), 1.5)
        emp = _synthetic(m, n=5000, m=30)
        perm = np.random.default_rng(1).permutation(30)
        shuffled = EmpiricalPdf(emp.centers[perm], emp.values[perm])
        np.testing.assert_allclose(cost_function(m, shuffled), cost_function(m, emp), rtol=1e-13)

    def test_epsilon_positive(self):
        m = MixedKies(Degenerate(2.0), 1.5)
        with pytest.raises(ValueError):
            cost_function(m, EmpiricalPdf(np.array([0.5]), np.array([1.0])), epsilon=0.0)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.01, 100), st.floats(0.3, 5))
    def test_finite_and_continuous(self, lam, beta):
        emp = EmpiricalPdf((np.arange(1, 21) - 0.5) / 20, np.linspace(0, 3, 20))
        c0 = cost_function(MixedKies(Degenerate(lam), beta), emp)
        c1 = cost_function(MixedKies(Degenerate(lam * (1 + 1e-9)), beta), emp)
        assert math.isfinite(c0)
        assert abs(c1 - c0) < 1e-6


class TestModelFromParameters:
    @pytest.mark.parametrize(
        "family,params",
        [
            ("A1", {"lambda": 2.0, "beta": 1.5}),
            ("A2", {"lambda_1": 2.0, "lambda_2": 0.5, "beta_1": 2.0, "beta_2": 1.0, "p_1": 0.25, "p_2": 0.75}),
            ("A4", {"beta": 1.7, "a": 3.8, "b": 2.8, "p": 0.0334, "n": 95}),
            ("A5", {"beta": 2.2, "a": 1.868, "b": 0.9654, "p": 0.0322}),
            ("A6", {"beta": 2.2, "a": 4.7886, "b": 2.054, "theta": 0.0869}),
            ("A7", {"beta": 1.96, "a": 6.9343, "b": 0.3263, "theta": 0.6134, "alpha": 1.9603}),
            ("A8", {"beta": 1.28, "a": 3.9552, "b": 4.9723, "theta": 3.0, "alpha": 2.5}),
        ],
    )
    def test_builds_valid_model(self, family, params):
        m = model_from_parameters(family, params)
        assert isinstance(m, MixedKies)
        assert math.isfinite(objective(family, params, _synthetic(m, n=2000), 0.01))

    def test_invalid_parameters_are_penalised(self):
        emp = EmpiricalPdf(np.array([0.5]), np.array([1.0]))
        assert objective("A1", {"lambda": -1.0, "beta": 1.0}, emp, 0.01) == PENALTY
        assert objective("A6", {"beta": 0.5, "a": 1.0, "b": 0.0, "theta": 1.0}, emp, 0.01) == PENALTY

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            model_from_parameters("A9", {"a": 1.0, "b": 1.0, "beta": 1.0})
        with pytest.raises(ValueError):
            FitConfig("A0")


class TestFitConfig:
    def test_defaults(self):
        c = FitConfig("A1")
        assert c.epsilon == 0.01 and c.restarts == 32
        assert c.integer_n_search == (1, 2000)
        assert set(FAMILIES) == {f"A{i}" for i in range(1, 9)}

    @pytest.mark.parametrize(
        "kwargs",
        [{"epsilon": 0.0}, {"restarts": 0}, {"max_iterations": 0}, {"integer_n_search": (5, 2)}, {"components": 1}],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            FitConfig("A1", **kwargs)

    def test_box_override(self):
        c = FitConfig("A1", boxes={"lambda": (1.0, 2.0)})
        assert c.resolved_boxes()["lambda"] == (1.0, 2.0)
        assert c.resolved_boxes()["beta"] == (0.3, 5.0)


class TestFit:
    def test_a1_recovers_parameters(self):
        truth = MixedKies(Degenerate(2.0), 1.5)
        r = fit("A1", _synthetic(truth), FitConfig("A1", restarts=8, seed=3))
        np.testing.assert_allclose([r.parameters["lambda"], r.parameters["beta"]], [2.0, 1.5], rtol=0.1)
        assert r.converged

    def test_result_invariants(self):
        emp = _synthetic(MixedKies(Degenerate(2.0), 1.5), n=20_000)
        r = fit("A1", emp, FitConfig("A1", restarts=6, seed=1))
        assert r.cost == cost_function(r.model(), emp)
        assert r.cost <= min(r.restart_costs)
        assert r.evaluations > 0
        doc = r.to_dict()
        assert doc["family"] == "A1" and set(doc["parameters"]) == {"lambda", "beta"}

    def test_deterministic(self):
        emp = _synthetic(MixedKies(Degenerate(0.5), 2.5), n=20_000)
        a = fit("A1", emp, FitConfig("A1", restarts=4, seed=5))
        b = fit("A1", emp, FitConfig("A1", restarts=4, seed=5))
        assert a.parameters == b.parameters and a.cost == b.cost

    def test_a6_on_uniform_data(self):
        uniform = MixedKies(Exponential(1.0), 1.0)
        emp = _synthetic(uniform, seed=2)
        r = fit("A6", emp, FitConfig("A6", restarts=8, seed=0))
        assert r.cost <= cost_function(uniform, emp) + 1e-6

    def test_a2_two_component_table(self):
        truth = model_from_parameters(
            "A2", {"lambda_1": 2.0, "lambda_2": 0.5, "beta_1": 2.0, "beta_2": 1.0, "p_1": 0.25, "p_2": 0.75}
        )
        emp = _synthetic(truth, n=50_000)
        r = fit("A2", emp, FitConfig("A2", restarts=8, seed=1))
        assert r.cost <= cost_function(truth, emp) + 1e-6
        np.testing.assert_allclose(sum(r.parameters[f"p_{i}"] for i in (1, 2)), 1.0, rtol=1e-12)

    def test_a3_component_count(self):
        emp = _synthetic(MixedKies(Degenerate(2.0), 1.5), n=5000, m=20)
        r = fit("A3", emp, FitConfig("A3", restarts=2, max_iterations=300, components=4, seed=0))
        assert sum(1 for k in r.parameters if k.startswith("lambda_")) == 4

    def test_a4_integer_n(self):
        truth = model_from_parameters("A4", {"beta": 1.7, "a": 3.8, "b": 2.8, "p": 0.0334, "n": 95})
        emp = _synthetic(truth, n=20_000, m=30)
        config = FitConfig("A4", restarts=4, seed=0, integer_n_search=(80, 110), n_grid_points=4, max_iterations=800)
        r = fit("A4", emp, config)
        assert isinstance(r.parameters["n"], int) and 80 <= r.parameters["n"] <= 110
        assert r.cost <= cost_function(truth, emp) + 1e-6

    def test_family_argument_wins(self):
        emp = _synthetic(MixedKies(Degenerate(2.0), 1.5), n=5000, m=20)
        r = fit("A1", emp, FitConfig("A6", restarts=2, max_iterations=200))
        assert r.family == "A1"
