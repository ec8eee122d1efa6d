import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from canfis.exceptions import ConfigurationError, DimensionError
from canfis.fuzzy import FuzzyGrid
from canfis.network import (
    CanfisNetwork,
    NetworkConfig,
    forward,
    get_params,
    init_network,
    load_network,
    param_count,
    predict,
    save_network,
    set_params,
)


def single_rule_net(consequents):
    grid = FuzzyGrid(np.array([[[0.5, 2.0, 0.5]], [[0.5, 2.0, 0.5]]]))
    return CanfisNetwork(grid, np.asarray(consequents, dtype=float).reshape(1, 2, 3))


def test_init_two_mf_grid_without_jitter():
    net = init_network(NetworkConfig(n_mf=2, jitter=0.0))
    for i in range(2):
        np.testing.assert_array_equal(net.grid.params[i, :, 2], [0.0, 1.0])
        np.testing.assert_array_equal(net.grid.params[i, :, 0], [0.5, 0.5])
        np.testing.assert_array_equal(net.grid.params[i, :, 1], [2.0, 2.0])


def test_init_single_mf_is_midpoint():
    net = init_network(NetworkConfig(n_mf=1, jitter=0.0))
    np.testing.assert_array_equal(net.grid.params[:, 0], [[0.5, 2.0, 0.5]] * 2)


def test_init_widths_follow_spacing():
    net = init_network(NetworkConfig(n_mf=4, jitter=0.0), ((0, 3), (-1, 1)))
    np.testing.assert_allclose(net.grid.params[0, :, 2], [0, 1, 2, 3])
    np.testing.assert_allclose(net.grid.params[0, :, 0], 0.5)
    np.testing.assert_allclose(net.grid.params[1, :, 0], 2 / 6)


def test_init_jitter_and_consequent_ranges():
    base = init_network(NetworkConfig(n_mf=3, jitter=0.0))
    net = init_network(NetworkConfig(n_mf=3, seed=4))
    ratio = net.grid.params[base.grid.params != 0] / base.grid.params[base.grid.params != 0]
    assert np.all(np.abs(ratio - 1) <= 0.05)
    assert np.all(np.abs(net.consequents) <= 0.1)


def test_init_is_deterministic():
    a = get_params(init_network(NetworkConfig(n_mf=3, seed=11)))
    b = get_params(init_network(NetworkConfig(n_mf=3, seed=11)))
    assert a.tobytes() == b.tobytes()
    assert a.tobytes() != get_params(init_network(NetworkConfig(n_mf=3, seed=12))).tobytes()


@pytest.mark.parametrize("bad_range", [((1, 1), (0, 1)), ((0, 1), (2, 1))])
def test_init_rejects_degenerate_range(bad_range):
    with pytest.raises(ConfigurationError):
        init_network(NetworkConfig(), bad_range)


@pytest.mark.parametrize("kwargs", [dict(n_mf=0), dict(n_mf=2, mf_shape="gauss"), dict(n_inputs=3),
                                    dict(output_transfer="tanh"), dict(seed=-1)])
def test_config_fixed_fields(kwargs):
    with pytest.raises(ConfigurationError):
        NetworkConfig(**kwargs)


def test_forward_zero_consequents_gives_half():
    trace = forward(single_rule_net(np.zeros(6)), (0.3, 0.9))
    np.testing.assert_array_equal(trace.z, [0, 0])
    np.testing.assert_array_equal(trace.y, [0.5, 0.5])


def test_forward_single_rule_sigmoid_value():
    trace = forward(single_rule_net([1, 1, 0, 0, 0, 0]), (1.0, 1.0))
    assert trace.z[0] == pytest.approx(2.0, abs=1e-15)
    assert trace.y[0] == pytest.approx(1 / (1 + math.exp(-2)), rel=1e-15)
    assert trace.y[0] == pytest.approx(0.880797, abs=1e-6)


def test_trace_has_one_shared_firing_vector():
    net = init_network(NetworkConfig(n_mf=3, seed=1))
    trace = forward(net, (0.2, 0.7))
    assert trace.firing.normalized.shape == (9,)
    z_manual = trace.firing.normalized @ trace.rule_outputs
    np.testing.assert_allclose(trace.z, z_manual, rtol=1e-14)


@pytest.mark.parametrize("n_mf, count", [(1, 12), (2, 36), (3, 72), (4, 120)])
def test_param_count(n_mf, count):
    assert param_count(n_mf) == count
    net = init_network(NetworkConfig(n_mf=n_mf))
    assert net.param_count == count == get_params(net).size


def test_param_roundtrip_preserves_outputs(rng):
    net = init_network(NetworkConfig(n_mf=3, seed=2))
    again = set_params(net, get_params(net))
    X = rng.uniform(-0.5, 1.5, (100, 2))
    np.testing.assert_array_equal(predict(net, X), predict(again, X))
    np.testing.assert_array_equal(get_params(again), get_params(net))


def test_set_params_wrong_length():
    net = init_network(NetworkConfig(n_mf=2))
    with pytest.raises(DimensionError):
        set_params(net, np.zeros(35))


def test_param_layout_is_structured():
    net = init_network(NetworkConfig(n_mf=2, seed=0))
    base = get_params(net)
    # (input 1, MF 0, b) sits at offset (1*2 + 0)*3 + 1
    bumped = set_params(net, base + np.eye(base.size)[7] * 0.25)
    diff = bumped.grid.params - net.grid.params
    assert diff[1, 0, 1] == pytest.approx(0.25)
    assert np.count_nonzero(diff) == 1
    np.testing.assert_array_equal(bumped.consequents, net.consequents)
    # consequent (rule 3, output 1, r_bias) is last
    bumped = set_params(net, base + np.eye(base.size)[-1])
    assert bumped.consequent(3, 1).r_bias == pytest.approx(net.consequent(3, 1).r_bias + 1)
    assert np.count_nonzero(bumped.consequents - net.consequents) == 1


@settings(max_examples=50)
@given(st.integers(1, 4), st.integers(0, 2**16), st.floats(-5, 5), st.floats(-5, 5))
def test_outputs_strictly_inside_unit_interval(n_mf, seed, x, y):
    net = init_network(NetworkConfig(n_mf=n_mf, seed=seed))
    out = forward(net, (x, y)).y
    assert np.all((out > 0) & (out < 1))


def test_forward_is_pure():
    net = init_network(NetworkConfig(n_mf=2, seed=3))
    before = get_params(net).copy()
    a = forward(net, (0.4, 0.1)).y
    b = forward(net, (0.4, 0.1)).y
    np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(get_params(net), before)


def test_network_is_immutable():
    net = init_network(NetworkConfig())
    with pytest.raises(ValueError):
        net.consequents[0, 0, 0] = 1.0


def test_save_load_roundtrip(tmp_path):
    config = NetworkConfig(n_mf=3, seed=9)
    net = init_network(config)
    path = tmp_path / "weights.json"
    save_network(net, path, config)
    doc = json.loads(path.read_text())
    assert doc["config"]["n_mf"] == 3 and doc["param_count"] == 72
    loaded = load_network(path)
    assert get_params(loaded).tobytes() == get_params(net).tobytes()
