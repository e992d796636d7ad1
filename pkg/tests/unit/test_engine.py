import json

import numpy as np
import pytest
from scipy.special import expit

from src.core.errors import ConfigError, EstimationError, SingularHessianError
from src.engine import (
    EstimationResult,
    EstimationSettings,
    OptimizerSettings,
    covariance,
    estimate,
    fit_statistics,
    maximize,
    null_loglik,
    numerical_hessian,
    significance_mark,
    standard_errors,
)
from src.engine.covariance import covariance_from_hessian
from src.rum.spec import ParameterVector
from tests.helpers import linear_spec, make_dataset


def quadratic(theta):
    return -(theta[0] - 3.0) ** 2, np.array([-2.0 * (theta[0] - 3.0)])


def rosenbrock(theta):
    x, y = theta
    value = -((1 - x) ** 2 + 100 * (y - x ** 2) ** 2)
    grad = -np.array([-2 * (1 - x) - 400 * x * (y - x ** 2), 200 * (y - x ** 2)])
    return value, grad


def logit_sample(n, beta, seed, constants=0.0):
    """Binary data with utility difference ``beta * (x0 - x1) + constants``."""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, 2))
    p0 = expit(beta * (x[:, 0] - x[:, 1]) + constants)
    chosen = (rng.random(n) >= p0).astype(int)
    return make_dataset(x, chosen=chosen, names=("x",))


class TestMaximize:
    def test_quadratic(self):
        outcome = maximize(quadratic, np.array([0.0]))
        assert outcome.converged
        assert outcome.theta[0] == pytest.approx(3.0, abs=1e-6)

    def test_start_at_optimum(self):
        outcome = maximize(quadratic, np.array([3.0]))
        assert outcome.converged
        assert outcome.iterations <= 2
        assert outcome.theta[0] == 3.0

    def test_rosenbrock(self):
        outcome = maximize(rosenbrock, np.array([-1.2, 1.0]), OptimizerSettings(max_iterations=1000))
        assert outcome.converged
        assert outcome.theta == pytest.approx([1.0, 1.0], abs=1e-3)

    def test_trace_never_decreases(self):
        outcome = maximize(rosenbrock, np.array([-1.2, 1.0]), OptimizerSettings(max_iterations=1000))
        assert np.all(np.diff(outcome.trace) >= -1e-12)

    def test_iteration_cap(self):
        outcome = maximize(rosenbrock, np.array([-1.2, 1.0]), OptimizerSettings(max_iterations=3))
        assert not outcome.converged
        assert outcome.iterations == 3
        assert outcome.message == "iteration limit reached"

    def test_nan_at_start(self):
        with pytest.raises(EstimationError):
            maximize(lambda theta: (float("nan"), np.zeros(1)), np.array([0.0]))

    def test_accepts_parameter_vector(self):
        start = ParameterVector(("a",), np.array([1.0]))
        assert maximize(quadratic, start).theta[0] == pytest.approx(3.0, abs=1e-6)


class TestCovariance:
    def test_quadratic_variance(self):
        cov = covariance(quadratic, np.array([3.0]))
        assert cov[0, 0] == pytest.approx(0.5, rel=1e-6)

    def test_hessian_is_symmetric(self):
        hessian = numerical_hessian(rosenbrock, np.array([0.3, -0.4]))
        assert hessian[0, 1] == hessian[1, 0]
        assert hessian[1, 1] == pytest.approx(-200.0, rel=1e-6)

    def test_singular_names_the_pair(self):
        hessian = np.array([[-2.0, -2.0, 0.0], [-2.0, -2.0, 0.0], [0.0, 0.0, -1.0]])
        with pytest.raises(SingularHessianError) as info:
            covariance_from_hessian(hessian, ["a", "b", "c"])
        assert info.value.pair == ("a", "b")

    def test_zero_row_pairs_with_itself(self):
        hessian = np.array([[-1.0, 0.0], [0.0, 0.0]])
        with pytest.raises(SingularHessianError) as info:
            covariance_from_hessian(hessian, ["a", "b"])
        assert info.value.pair == ("b", "b")

    def test_standard_errors(self):
        assert standard_errors(np.diag([4.0, -1.0]))[0] == 2.0
        assert np.isnan(standard_errors(np.diag([4.0, -1.0]))[1])


class TestResultHelpers:
    @pytest.mark.parametrize("t_stat, mark", [(1.96, "**"), (-2.5, "**"), (1.7, "*"), (1.6, ""), (None, "")])
    def test_significance(self, t_stat, mark):
        assert significance_mark(t_stat) == mark

    def test_fit_statistics(self):
        stats = fit_statistics(loglik=-80.0, loglik_null=-100.0, n_parameters=4, n_observations=50)
        assert stats["rho_squared"] == pytest.approx(0.2)
        assert stats["adjusted_rho_squared"] == pytest.approx(0.16)
        assert stats["aic"] == pytest.approx(168.0)
        assert stats["bic"] == pytest.approx(4 * np.log(50) + 160.0)

    def test_null_loglik(self):
        ds = make_dataset(np.zeros((2, 4)), chosen=[0, 0], available=[[True] * 4, [True, True, False, False]])
        assert null_loglik(ds) == pytest.approx(-np.log(4.0) - np.log(2.0))


class TestEstimate:
    def test_recovers_logit_coefficient(self):
        ds = logit_sample(3000, -0.8, seed=21)
        result = estimate(linear_spec(("x",)), ds, "RUM")
        assert result.converged
        assert abs(result.params["b_x"] + 0.8) < 3.0 * result.std_errors["b_x"]
        assert result.rho_squared > 0.0
        assert result.n_observations == 3000

    def test_regret_matches_utility_on_binary_data(self):
        ds = logit_sample(1500, 0.6, seed=5, constants=0.3)
        spec = linear_spec(("x",), n_constants=2)
        rum = estimate(spec, ds, "RUM")
        rrm = estimate(spec, ds, "RRM")
        for name in spec.parameter_names:
            assert rrm.params[name] == pytest.approx(rum.params[name], abs=1e-5)

    def test_standard_errors_shrink_with_sample_size(self):
        spec = linear_spec(("x",))
        small = estimate(spec, logit_sample(2000, -0.5, seed=1), "RUM")
        large = estimate(spec, logit_sample(8000, -0.5, seed=2), "RUM")
        assert small.std_errors["b_x"] / large.std_errors["b_x"] == pytest.approx(2.0, rel=0.1)

    def test_duplicated_attribute_is_singular(self):
        ds = logit_sample(500, -0.5, seed=3)
        attributes = np.concatenate([ds.attributes, ds.attributes], axis=-1)
        twin = make_dataset(attributes, chosen=ds.chosen, names=("x", "x_copy"))
        with pytest.raises(SingularHessianError) as info:
            estimate(linear_spec(("x", "x_copy")), twin, "RUM")
        assert set(info.value.pair) == {"b_x", "b_x_copy"}

    def test_mixed_logit_runs_with_warm_start(self, random_dataset):
        spec = linear_spec(("x1", "x2", "x3"), random=("x1",))
        settings = EstimationSettings(n_draws=30, compute_covariance=False)
        result = estimate(spec, random_dataset, "RUM", settings)
        assert result.parameter_names == ["b_x1", "b_x2", "b_x3", "sd_b_x1"]
        assert result.params["sd_b_x1"] >= 0.0
        assert result.n_draws == 30
        assert result.draw_kind == "halton"

    def test_pseudo_random_draws_need_seed(self, random_dataset):
        spec = linear_spec(("x1",), random=("x1",))
        with pytest.raises(ConfigError):
            estimate(spec, random_dataset, "RUM", EstimationSettings(draw_kind="pseudo-random", n_draws=10))

    def test_deterministic(self, random_dataset):
        spec = linear_spec(("x1", "x2", "x3"), n_constants=4)
        a = estimate(spec, random_dataset, "RRM", seed=4)
        b = estimate(spec, random_dataset, "RRM", seed=4)
        assert a.model_dump_json() == b.model_dump_json()


class TestEstimationResult:
    @pytest.fixture
    def result(self):
        return estimate(linear_spec(("x",), n_constants=2), logit_sample(800, -0.7, seed=9, constants=0.2),
                        "RUM", seed=12, config_hash="abc123")

    def test_write_and_read(self, result, tmp_path):
        paths = result.write(tmp_path, stem="estimate_rum")
        again = EstimationResult.read(paths["json"])
        assert again.params == result.params
        assert again.spec == result.spec
        assert np.allclose(again.covariance_matrix(), result.covariance_matrix())
        document = json.loads(paths["json"].read_text())
        assert document["header"] == {"tool": "choicekit", "version": document["header"]["version"],
                                      "config_hash": "abc123", "seed": 12}

    def test_text_report(self, result, tmp_path):
        text = result.write(tmp_path)["text"].read_text()
        lines = text.splitlines()
        assert lines[0].startswith("# choicekit ")
        assert "config=abc123 seed=12" in lines[0]
        assert "model_kind = RUM" in lines
        assert any(line.startswith("param.b_x = ") for line in lines)
        assert any(line.startswith("loglik_final = ") for line in lines)

    def test_summary_frame(self, result):
        frame = result.summary_frame()
        assert frame["parameter"].tolist() == ["b_x", "asc_1"]
        assert frame.loc[0, "significance"] == "**"
