import json
import math

import pytest

import mg1sim

MM1 = {
    "classes": [
        {
            "lambda": 1.0,
            "size": {"kind": "exponential", "mean": 0.4},
            "delay_bound": 2.0,
            "penalty": {"kind": "quadratic", "coeff": 1.0},
        },
        {
            "lambda": 2.0,
            "size": {"kind": "exponential", "mean": 0.2},
            "delay_bound": 2.0,
            "penalty": {"kind": "quadratic", "coeff": 4.0},
        },
    ],
    "rate": {"kind": "linear"},
    "p_min": 1.0,
    "p_max": 1.0,
    "v": 100.0,
}


@pytest.fixture
def config():
    return mg1sim.Config.from_json(json.dumps(MM1))


def test_config_roundtrip(config):
    assert config.num_classes == 2
    assert config.total_lambda == pytest.approx(3.0)
    back = mg1sim.Config.from_json(config.to_json())
    assert back.num_classes == 2


def test_load_profile(config):
    profile = mg1sim.load_profile(config, 1.0)
    assert profile["rho"] == pytest.approx([0.4, 0.4])
    assert profile["residual"] == pytest.approx(0.24)
    assert mg1sim.expected_frame_size(config, 1.0) == pytest.approx(5.0 / 3.0)


def test_priority_delays_and_region(config):
    assert mg1sim.priority_delays(config, 1.0, [0, 1]) == pytest.approx([0.4, 2.0])
    region = mg1sim.delay_region(config, 1.0)
    assert region["min_delay"] == pytest.approx([0.4, 0.4])
    assert region["conservation"] == pytest.approx(0.96)
    assert mg1sim.conservation_value(config, 1.0) == pytest.approx(0.96)


def test_vertices_and_penalty_oracle(config):
    vertices = mg1sim.enumerate_vertices(config, 1.0)
    assert len(vertices) == 2
    assert vertices[0]["delays"] == pytest.approx([0.4, 2.0])

    target = mg1sim.min_penalty_target(config, 1.0)
    assert target["delays"] == pytest.approx([1.92, 0.48], abs=1e-6)
    assert target["penalty"] == pytest.approx(2.304, abs=1e-6)


def test_unstable_config_raises():
    bad = json.loads(json.dumps(MM1))
    bad["classes"][0]["size"]["mean"] = 0.9  # work rate 0.9 + 0.4 > mu = 1
    with pytest.raises(mg1sim.Mg1simError):
        mg1sim.Config.from_json(json.dumps(bad))


def test_simulation_is_deterministic(config):
    a = mg1sim.simulate(config, "delayfeas", 5000, 7)
    b = mg1sim.simulate(config, "delayfeas", 5000, 7)
    assert a["delays"] == b["delays"]
    assert a["z"] == b["z"]
    assert a["frames"] == 5000
    assert all(z >= 0.0 for z in a["z"])


def test_fixed_order_simulation_tracks_the_formula():
    cfg = json.loads(json.dumps(MM1))
    cfg["fixed_order"] = [1, 2]
    config = mg1sim.Config.from_json(json.dumps(cfg))
    result = mg1sim.simulate(config, "fixed-order", 200_000, 1)
    assert result["delays"][0] == pytest.approx(0.4, rel=0.05)
    assert result["delays"][1] == pytest.approx(2.0, rel=0.05)


def test_replications(config):
    rep = mg1sim.simulate_replications(config, "delayfair", 2000, 1, 3)
    assert len(rep["runs"]) == 3
    assert len(rep["delay_mean"]) == 2
    assert not math.isnan(rep["delay_mean"][0])
