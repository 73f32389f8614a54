import numpy as np
import pytest

from osa.ccucb.environment import BernoulliEnvironment, OsaEnvironment
from osa.ccucb.policy import PolicyConfig
from osa.ccucb.scenario import (
    FULL_HORIZON,
    PRESETS,
    SCENARIO1_ROW,
    SCENARIO2_LAST_ROW,
    THROUGHPUT_THETA,
    ScenarioConfig,
    ScenarioError,
    load_scenario,
    parse_scenario,
)


def _write(tmp_path, text, name="custom.yaml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_every_preset_loads(name):
    cfg = load_scenario(name)
    assert cfg.name == name
    assert cfg.n_users <= cfg.n_channels
    assert cfg.true_weights().shape == (cfg.n_users, cfg.n_channels)


def test_scenario1_rows():
    w = load_scenario("scenario1").true_weights()
    assert w.shape == (3, 10)
    for row in w:
        assert tuple(row) == SCENARIO1_ROW


def test_scenario2_last_row():
    w = load_scenario("scenario2").true_weights()
    assert tuple(w[2]) == SCENARIO2_LAST_ROW
    assert tuple(w[0]) == SCENARIO1_ROW


def test_throughput_presets():
    cfg = load_scenario("throughput-c4")
    assert (cfg.n_users, cfg.n_channels) == (4, 10)
    assert cfg.policy.coordination == "round_robin" and cfg.policy.r_period == 4
    assert cfg.true_weights()[0] == pytest.approx(0.8 * np.array(THROUGHPUT_THETA))
    assert isinstance(cfg.environment(0), OsaEnvironment)
    assert isinstance(load_scenario("scenario1").environment(0), BernoulliEnvironment)


def test_more_users_than_channels_is_rejected(tmp_path):
    with pytest.raises(ScenarioError):
        ScenarioConfig(
            name="bad",
            n_channels=3,
            n_users=5,
            availability=(0.5, 0.5, 0.5),
            policy=PolicyConfig(),
        )
    path = _write(tmp_path, "users: 5\nnetwork:\n  availability: [0.1, 0.2, 0.3]\n")
    with pytest.raises(ScenarioError) as info:
        load_scenario(path)
    assert info.value.path == "users"


def test_yaml_scenario(tmp_path):
    path = _write(
        tmp_path,
        """
name: four-users
users: 4
network:
  availability: [0.1, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
sensing:
  false_alarm: 0.2
  miss_detection: 0.05
policy:
  kind: cc_ucb1
  coordination: round_robin
  alpha: 1.5
run:
  horizon: 5000
  runs: 4
  seed: 9
  stride: 50
""",
    )
    cfg = load_scenario(path)
    assert cfg.name == "four-users"
    assert cfg.policy.r_period == 4
    assert cfg.policy.alpha == 1.5
    assert (cfg.horizon, cfg.n_runs, cfg.base_seed, cfg.stride) == (5000, 4, 9, 50)
    assert cfg.true_weights()[3, 9] == pytest.approx(0.72)


def test_direct_weights_and_r_period_forms():
    data = {"weights": [list(SCENARIO1_ROW)] * 2 + [list(SCENARIO2_LAST_ROW)], "policy": {"alpha": 3.0}}
    assert parse_scenario(data).policy.r_period == 1
    data["weights"] = [list(SCENARIO1_ROW)] * 3
    assert parse_scenario(data).policy.r_period == 3
    data["policy"] = {"r_period": "K"}
    assert parse_scenario(data).policy.r_period == 3
    data["policy"] = {"r_period": 1}
    assert parse_scenario(data).policy.r_period == 1


@pytest.mark.parametrize(
    "data, path",
    [
        ({"users": 2, "network": {"availability": [0.5, 1.2, 0.3]}}, "network.availability[1]"),
        ({"users": 2, "network": {"availability": [0.5, "x"]}}, "network.availability[1]"),
        ({"users": 2, "network": {"availability": []}}, "network.availability"),
        ({"users": 2}, "network.availability"),
        ({"network": {"availability": [0.5, 0.5]}}, "users"),
        (
            {"users": 2, "network": {"availability": [0.5, 0.5]}, "sensing": {"false_alarm": [[0.1, 0.2], [0.1, 1.5]]}},
            "sensing.false_alarm[1][1]",
        ),
        ({"weights": [[0.5, 0.5]], "network": {"availability": [0.5, 0.5]}}, "weights"),
        ({"weights": [[0.5, 0.5]], "users": 2}, "users"),
        ({"users": 2, "network": {"availability": [0.5, 0.5]}, "policy": {"kind": "greedy"}}, "policy"),
        ({"users": 2, "network": {"availability": [0.5, 0.5]}, "policy": {"r_period": 5}}, "policy"),
        ({"users": 2, "network": {"availability": [0.5, 0.5]}, "run": {"horizon": "long"}}, "run.horizon"),
        ({"users": 2, "network": {"availability": [0.5, 0.5]}, "run": {"runs": 0}}, "run.runs"),
        ({"users": 2, "network": [0.5, 0.5]}, "network"),
    ],
)
def test_field_path_in_errors(data, path):
    with pytest.raises(ScenarioError) as info:
        parse_scenario(data)
    assert info.value.path == path
    assert str(info.value).startswith(f"{path}: ")


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ScenarioError, match="no preset or file"):
        load_scenario(tmp_path / "nope.yaml")
    with pytest.raises(ScenarioError):
        load_scenario(_write(tmp_path, "users: [1, 2\n", name="broken.yaml"))
    with pytest.raises(ScenarioError):
        load_scenario(_write(tmp_path, "- 1\n- 2\n", name="list.yaml"))


def test_with_users_follows_r_period():
    cfg = load_scenario("throughput-c4").with_users(6)
    assert cfg.n_users == 6
    assert cfg.policy.r_period == 6
    assert cfg.true_weights().shape == (6, 10)
    with pytest.raises(ScenarioError):
        load_scenario("throughput-c4").with_users(11)
    with pytest.raises(ScenarioError):
        load_scenario("scenario1").with_users(2)


def test_full_scale():
    c4 = load_scenario("throughput-c4").full_scale()
    assert (c4.horizon, c4.n_runs) == (FULL_HORIZON, 1000)
    s1 = load_scenario("scenario1").full_scale()
    assert (s1.horizon, s1.n_runs) == (FULL_HORIZON, 30)


def test_weights_shape_must_match():
    with pytest.raises(ScenarioError):
        ScenarioConfig(
            name="bad",
            n_channels=4,
            n_users=2,
            weights=np.full((3, 4), 0.5),
            policy=PolicyConfig(),
        )
