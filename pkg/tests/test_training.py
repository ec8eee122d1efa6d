import numpy as np
import pytest

from canfis.datasets import Dataset, Sample, builtin_cv, builtin_training
from canfis.exceptions import ConfigurationError, DataError, DimensionError, TrainingDivergedError
from canfis.fuzzy import FuzzyGrid
from canfis.network import CanfisNetwork, NetworkConfig, forward, get_params, init_network, set_params
from canfis.training import (
    TrainingConfig,
    backward,
    compute_mse,
    finite_diff_gradient,
    momentum_step,
    train,
)


def zero_net(n_mf=1):
    net = init_network(NetworkConfig(n_mf=n_mf, jitter=0.0))
    return CanfisNetwork(net.grid, np.zeros_like(net.consequents))


def random_net(rng, n_mf):
    net = init_network(NetworkConfig(n_mf=n_mf, seed=int(rng.integers(2**31))))
    params = get_params(net)
    n_grid = net.grid.params.size
    params[n_grid:] = rng.uniform(-2, 2, params.size - n_grid)
    return set_params(net, params)


def test_mse_zero_when_outputs_match():
    net = zero_net()
    ds = Dataset((Sample(0.3, 0.2, 0.5, 0.5),), "test")
    assert compute_mse(net, ds) == 0.0


def test_mse_single_sample():
    ds = Dataset((Sample(0.3, 0.2, 0.0, 1.0),), "test")
    assert compute_mse(zero_net(), ds) == pytest.approx(0.25, abs=1e-15)


def test_mse_untrained_on_truth_table():
    # 8 output errors of 0.5 each: 8 * 0.25 / 8
    assert compute_mse(zero_net(), builtin_training()) == pytest.approx(0.25, abs=1e-15)


def test_mse_empty_dataset():
    with pytest.raises(DataError):
        compute_mse(zero_net(), Dataset((), "train"))


def test_backward_zero_when_desired_equals_output(rng):
    net = random_net(rng, 2)
    trace = forward(net, (0.3, 0.8))
    np.testing.assert_array_equal(backward(net, trace, (0.3, 0.8), trace.y), 0.0)


def test_single_rule_consequent_gradient_formula():
    net = init_network(NetworkConfig(n_mf=1, seed=5))
    point, desired = (0.7, 0.2), np.array([1.0, 0.0])
    trace = forward(net, point)
    grad = backward(net, trace, point, desired)
    y = trace.y
    expected = ((y - desired) * y * (1 - y))[:, None] * np.array([0.7, 0.2, 1.0])
    np.testing.assert_allclose(grad[6:].reshape(2, 3), expected, rtol=1e-13)


@pytest.mark.parametrize("n_mf", [1, 2, 3])
def test_backward_matches_finite_differences(rng, n_mf):
    for _ in range(10):
        net = random_net(rng, n_mf)
        point = tuple(rng.uniform(-0.2, 1.2, 2))
        desired = rng.uniform(0, 1, 2)
        analytic = backward(net, forward(net, point), point, desired)
        numeric = finite_diff_gradient(net, point, desired)
        scale = np.maximum(np.abs(analytic), np.abs(numeric))
        keep = scale >= 1e-10
        assert np.all(np.abs(analytic - numeric)[keep] / scale[keep] < 1e-5)


def test_backward_rejects_bad_desired():
    net = zero_net()
    trace = forward(net, (0, 0))
    with pytest.raises(DimensionError):
        backward(net, trace, (0, 0), [1, 0, 0])


def test_backward_rejects_foreign_trace():
    trace = forward(zero_net(2), (0, 0))
    with pytest.raises(DimensionError):
        backward(zero_net(3), trace, (0, 0), [1, 0])


def test_finite_difference_near_zero_for_exact_sample():
    net = init_network(NetworkConfig(n_mf=2, seed=1))
    trace = forward(net, (0.4, 0.6))
    grad = finite_diff_gradient(net, (0.4, 0.6), trace.y)
    assert np.max(np.abs(grad)) < 1e-6


def test_finite_difference_is_second_order():
    # away from roundoff, the central-difference error scales with step**2
    net = init_network(NetworkConfig(n_mf=2, seed=3))
    point, desired = (0.3, 0.55), [1.0, 0.0]
    exact = backward(net, forward(net, point), point, desired)
    coarse = np.abs(finite_diff_gradient(net, point, desired, 2e-2) - exact).max()
    fine = np.abs(finite_diff_gradient(net, point, desired, 1e-2) - exact).max()
    assert 3.5 < coarse / fine < 4.5


def test_momentum_step_examples():
    p, v = momentum_step([2.0], [0.0], [0.0], 1.0, 0.6)
    assert p.tolist() == [2.0] and v.tolist() == [0.0]
    p, v = momentum_step([2.0], [1.0], [0.0], 1.0, 0.6)
    assert v.tolist() == [-1.0] and p.tolist() == [1.0]
    p, v = momentum_step(p, [1.0], v, 1.0, 0.6)
    assert v[0] == pytest.approx(-1.6, abs=1e-15)


def test_momentum_step_length_mismatch():
    with pytest.raises(DimensionError):
        momentum_step([1.0, 2.0], [1.0], [0.0, 0.0], 1.0, 0.6)


@pytest.mark.parametrize("kwargs", [dict(max_epochs=0), dict(step_size=0), dict(momentum=1.0),
                                    dict(momentum=-0.1), dict(cv_patience=-1)])
def test_training_config_validation(kwargs):
    with pytest.raises(ConfigurationError):
        TrainingConfig(**kwargs)


def test_single_epoch_gives_one_record():
    net = init_network(NetworkConfig(n_mf=2))
    report = train(net, builtin_training(), builtin_cv(), TrainingConfig(max_epochs=1))
    assert len(report.records) == 1 and report.records[0].epoch == 1


def test_training_is_deterministic():
    cfg = TrainingConfig(max_epochs=200)
    r1 = train(init_network(NetworkConfig(n_mf=3, seed=8)), builtin_training(), builtin_cv(), cfg)
    r2 = train(init_network(NetworkConfig(n_mf=3, seed=8)), builtin_training(), builtin_cv(), cfg)
    assert r1.records == r2.records
    assert r1.best_params.tobytes() == r2.best_params.tobytes()
    assert r1.final_params.tobytes() == r2.final_params.tobytes()


def test_report_bookkeeping():
    net = init_network(NetworkConfig(n_mf=2, seed=4))
    cv = builtin_cv()
    report = train(net, builtin_training(), cv, TrainingConfig(max_epochs=300))
    cv_values = [r.cv_mse for r in report.records]
    assert report.min_cv_mse == min(cv_values)
    assert report.records[report.best_epoch - 1].cv_mse == report.min_cv_mse
    assert compute_mse(set_params(net, report.best_params), cv) == report.min_cv_mse
    running = np.minimum.accumulate(cv_values)
    assert np.all(np.diff(running) <= 0)
    assert report.final_train_mse == report.records[-1].train_mse
    assert all(r.train_mse >= 0 and r.cv_mse >= 0 for r in report.records)


def test_early_stop_on_rising_cv_error():
    # the CV targets contradict the training targets, so CV error climbs
    flipped = Dataset(tuple(Sample(s.x, s.y, 1 - s.s, 1 - s.c) for s in builtin_cv()), "cv")
    net = init_network(NetworkConfig(n_mf=2, seed=0))
    report = train(net, builtin_training(), flipped, TrainingConfig(max_epochs=1000, cv_patience=20))
    assert report.stopped_early
    assert len(report.records) < 1000
    assert all(r.cv_mse > report.min_cv_mse for r in report.records[-20:])


def test_patience_zero_disables_early_stop():
    flipped = Dataset(tuple(Sample(s.x, s.y, 1 - s.s, 1 - s.c) for s in builtin_cv()), "cv")
    net = init_network(NetworkConfig(n_mf=2, seed=0))
    report = train(net, builtin_training(), flipped, TrainingConfig(max_epochs=150, cv_patience=0))
    assert not report.stopped_early and len(report.records) == 150


def test_divergence_raises_with_epoch():
    net = init_network(NetworkConfig(n_mf=2, seed=0))
    with pytest.raises(TrainingDivergedError) as info:
        train(net, builtin_training(), builtin_cv(), TrainingConfig(max_epochs=50, step_size=1e308))
    assert info.value.epoch >= 1


def test_widths_stay_positive_during_training():
    net = init_network(NetworkConfig(n_mf=4, seed=0))
    report = train(net, builtin_training(), builtin_cv(), TrainingConfig(max_epochs=1000))
    grid = FuzzyGrid(report.final_params[: net.grid.params.size].reshape(net.grid.params.shape))
    assert np.all(grid.params[..., 0] > 0)


@pytest.mark.slow
def test_training_improves_for_every_seed():
    for seed in range(10):
        net = init_network(NetworkConfig(n_mf=2, seed=seed))
        report = train(net, builtin_training(), builtin_cv(), TrainingConfig())
        assert report.train_mse_at(1000) < report.train_mse_at(1)
