"""Checkpoint container: bit-exact round-trips and format guards."""

import json

import numpy as np
import pytest

from regimernn import (
    ConfigurationError,
    Hyperparams,
    SwitchConfig,
    init_params,
    load_checkpoint,
    save_checkpoint,
)


class TestRoundTrip:
    def test_parameters_bit_exact(self, tmp_path):
        params = init_params(Hyperparams(num_regimes=3, hidden_dim=5, seed=77), 4, 2)
        path = tmp_path / "model.json"
        save_checkpoint(path, params, feature_dim=3)
        loaded = load_checkpoint(path)
        for original, restored in zip(params.arrays(), loaded.params.arrays()):
            np.testing.assert_array_equal(original, restored)
        assert loaded.feature_dim == 3

    def test_switch_and_hyper_echo(self, tmp_path):
        params = init_params(Hyperparams(num_regimes=2, hidden_dim=2, seed=0), 2, 1)
        switch = SwitchConfig(beta=0.55, likelihood_kind="laplacian_scalar")
        hp = {"hidden_dim": 2, "learning_rate": 0.001}
        path = tmp_path / "model.json"
        save_checkpoint(path, params, switch=switch, hyperparams=hp)
        loaded = load_checkpoint(path)
        assert loaded.switch == switch
        assert loaded.hyperparams == hp

    def test_save_load_save_identical(self, tmp_path):
        params = init_params(Hyperparams(num_regimes=2, hidden_dim=3, seed=5), 3, 1)
        first = tmp_path / "a.json"
        second = tmp_path / "b.json"
        save_checkpoint(first, params)
        save_checkpoint(second, load_checkpoint(first).params)
        assert first.read_bytes() == second.read_bytes()


class TestGuards:
    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="gone.json"):
            load_checkpoint(tmp_path / "gone.json")

    def test_bad_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigurationError):
            load_checkpoint(path)

    def test_wrong_version(self, tmp_path):
        params = init_params(Hyperparams(num_regimes=2, hidden_dim=2, seed=0), 2, 1)
        path = tmp_path / "model.json"
        save_checkpoint(path, params)
        payload = json.loads(path.read_text(encoding="utf-8"))
        payload["format_version"] = 99
        path.write_text(json.dumps(payload), encoding="utf-8")
        with pytest.raises(ConfigurationError, match="version"):
            load_checkpoint(path)

    def test_corrupt_weights_rejected(self, tmp_path):
        params = init_params(Hyperparams(num_regimes=2, hidden_dim=2, seed=0), 2, 1)
        path = tmp_path / "model.json"
        save_checkpoint(path, params)
        payload = json.loads(path.read_text(encoding="utf-8"))
        payload["model"]["transition"] = [[0.5, 0.6], [0.5, 0.5]]
        path.write_text(json.dumps(payload), encoding="utf-8")
        with pytest.raises(ConfigurationError):
            load_checkpoint(path)
