import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from perffunc.core import ALPHA_MAX, AmueParams, amue_eval
from perffunc.errors import FitError
from perffunc.fitting import FitOptions, evaluate_fit, fit_amue, fit_amue_arrays, levenberg_marquardt, split_train_test
from perffunc.fitting.amue import from_unconstrained, to_unconstrained
from perffunc.fitting.metrics import as_predictor, setup_label
from perffunc.ingest import ExperimentContext, ObservationSet
from synth import TRUE_PARAMS, grid_set, random_set


def _rel(a, b):
    return abs(a - b) / abs(b)


def test_lm_solves_linear_least_squares():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(30, 3))
    b = rng.normal(size=30)
    res = levenberg_marquardt(lambda x: (A @ x - b, A), np.zeros(3))
    expected = np.linalg.lstsq(A, b, rcond=None)[0]
    assert np.allclose(res.x, expected, atol=1e-8)
    assert res.converged


def test_lm_rosenbrock():
    def fun(x):
        r = np.array([10 * (x[1] - x[0] ** 2), 1 - x[0]])
        J = np.array([[-20 * x[0], 10.0], [-1.0, 0.0]])
        return r, J

    res = levenberg_marquardt(fun, np.array([-1.2, 1.0]), max_iterations=1000)
    assert np.allclose(res.x, [1.0, 1.0], atol=1e-6)


def test_lm_history_non_increasing():
    obs = grid_set(noise=0.5)
    _, results = fit_amue_arrays(obs.t, obs.m, obs.pi, FitOptions(restarts=4))
    for r in results:
        assert all(b <= a for a, b in zip(r.history, r.history[1:]))


def test_lm_respects_bounds():
    res = levenberg_marquardt(
        lambda x: (x - 5.0, np.eye(2)), np.zeros(2), bounds=(np.array([-1.0, -1.0]), np.array([1.0, 2.0]))
    )
    assert np.allclose(res.x, [1.0, 2.0])


@given(
    st.floats(1e-3, 90), st.floats(1e-3, 10), st.floats(0.01, 0.98), st.floats(1e-3, 10), st.floats(0.01, 0.98)
)
def test_reparameterisation_round_trip(a_zs, a_t, alpha_t, a_m, alpha_m):
    p = AmueParams(a_zs, a_t, alpha_t, a_m, alpha_m)
    q = from_unconstrained(to_unconstrained(p))
    for k, v in p.as_dict().items():
        assert q.as_dict()[k] == pytest.approx(v, rel=1e-9)


@given(st.lists(st.floats(-60, 60), min_size=5, max_size=5))
def test_every_unconstrained_point_is_valid(x):
    p = from_unconstrained(np.clip(np.array(x), -50, 15))
    assert 0 <= p.alpha_t <= ALPHA_MAX and 0 <= p.alpha_m <= ALPHA_MAX


def test_noise_free_recovery():
    params, report = fit_amue(grid_set())
    for k, v in TRUE_PARAMS.as_dict().items():
        assert _rel(params.as_dict()[k], v) < 1e-3, k
    assert report.rmse < 1e-6


def test_noisy_fit_generalises():
    train = random_set(100, noise=0.5, seed=3)
    test = random_set(25, noise=0.5, seed=4)
    params, _ = fit_amue(train)
    assert evaluate_fit(params, test, "test").rmse <= 0.75


def test_fit_is_deterministic():
    obs = grid_set(noise=0.5, seed=1)
    a, _ = fit_amue(obs, FitOptions(rng_seed=7))
    b, _ = fit_amue(obs, FitOptions(rng_seed=7))
    assert a == b


def test_best_start_is_minimum_cost():
    obs = grid_set(noise=0.5, seed=2)
    params, results = fit_amue_arrays(obs.t, obs.m, obs.pi, FitOptions(restarts=6))
    assert len(results) == 6
    best = min(r.cost for r in results)
    resid = obs.pi - amue_eval(params, obs.t, obs.m)
    assert 0.5 * float(resid @ resid) == pytest.approx(best, rel=1e-9)


def test_too_few_points():
    ctx = ExperimentContext("sw", 100.0)
    obs = ObservationSet.from_arrays(ctx, [0, 1, 2, 3], [0, 1, 2, 3], [1, 2, 3, 4])
    with pytest.raises(FitError):
        fit_amue(obs)


def test_identical_configurations_rejected():
    with pytest.raises(FitError):
        fit_amue_arrays(np.full(6, 5.0), np.full(6, 5.0), np.arange(6.0))


@pytest.mark.parametrize("kw", [{"max_iterations": 0}, {"restarts": 0}, {"tolerance": 0.0}])
def test_fit_options_validation(kw):
    with pytest.raises(ValueError):
        FitOptions(**kw)


def test_setup_labels():
    assert setup_label(0, 0) == "zero-shot"
    assert setup_label(10, 0) == "translate-train"
    assert setup_label(0, 10) == "few-shot"
    assert setup_label(10, 10) == "combined"


def test_report_per_setup_and_perfect_fit():
    obs = grid_set()
    rep = evaluate_fit(TRUE_PARAMS, obs)
    assert rep.rmse == pytest.approx(0.0, abs=1e-12)
    assert rep.r2 == pytest.approx(1.0)
    assert set(rep.per_setup) == {"zero-shot", "translate-train", "few-shot", "combined"}
    assert rep.per_setup["zero-shot"].n == 1
    assert rep.per_setup["zero-shot"].r2 is None  # one point has no variance
    assert sum(s.n for s in rep.per_setup.values()) == rep.n
    d = rep.as_dict()
    assert d["split"] == "train" and d["per_setup"]["combined"]["n"] == 36


def test_report_known_values():
    ctx = ExperimentContext("sw", 100.0)
    obs = ObservationSet.from_arrays(ctx, [0, 1, 2, 3], [1, 1, 1, 1], [1.0, 2.0, 3.0, 4.0])
    rep = evaluate_fit(lambda t, m: np.array([1.0, 2.0, 3.0, 5.0]), obs)
    assert rep.rmse == pytest.approx(0.5)
    assert rep.r2 == pytest.approx(1 - 1 / 5)


def test_as_predictor_rejects_unknown():
    with pytest.raises(TypeError):
        as_predictor(42)


def test_split_sizes_and_disjointness():
    obs = random_set(50, seed=9)
    train, test = split_train_test(obs, 0.8, rng_seed=1)
    assert (len(train), len(test)) == (40, 10)
    keys = lambda s: {(o.t, o.m) for o in s}
    assert keys(train).isdisjoint(keys(test))
    assert keys(train) | keys(test) == keys(obs)
    again = split_train_test(obs, 0.8, rng_seed=1)
    assert [o.t for o in again[0]] == [o.t for o in train]


def test_split_validation():
    obs = random_set(10)
    with pytest.raises(ValueError):
        split_train_test(obs, 1.0)
    ctx = ExperimentContext("sw", 100.0)
    with pytest.raises(ValueError):
        split_train_test(ObservationSet.from_arrays(ctx, [1], [1], [1]))
