# Copyright 2026 The PyroGrid Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import math

import numpy as np
import pytest

import pyrogrid

TINY_GEN = {"agents": 2, "train_weeks": 24, "val_weeks": 10, "burn_in_weeks": 4}
TINY_TRAIN = {
    "d_enc": 4,
    "d_h": 4,
    "widths": [2, 2, 2, 2],
    "policy_hidden": 8,
    "batch": 2,
    "window": 2,
    "transition_batch": 4,
    "episodes": 1,
}


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("data")
    cfg = root / "gen.json"
    cfg.write_text(json.dumps(TINY_GEN))
    pyrogrid.gen_data(root / "ds", config=cfg)
    return root / "ds"


@pytest.fixture(scope="module")
def train_config(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "train.json"
    path.write_text(json.dumps(TINY_TRAIN))
    return path


def test_metrics():
    assert pyrogrid.bce(np.array([1.0, 0.0]), np.array([0.5, 0.5])) == pytest.approx(math.log(2.0))
    assert pyrogrid.auroc(np.array([1.0, 0.0, 1.0, 0.0]), np.array([0.9, 0.1, 0.8, 0.2])) == 1.0
    assert pyrogrid.auroc(np.array([1.0, 0.0]), np.array([0.3, 0.3])) == 0.5
    assert pyrogrid.iou(np.zeros((2, 2)), np.zeros((2, 2))) == 1.0
    assert pyrogrid.iou(np.array([[1.0, 0.0]]), np.array([[0.7, 0.6]])) == 0.5


def test_schedule_ordering():
    for n in [0, 1, 10, 1000, 10**6]:
        r = pyrogrid.step_rates(n)
        assert r["pred"] >= r["sys"] >= r["critic"] >= r["actor"] > 0.0
    with pytest.raises(pyrogrid.ConfigError):
        pyrogrid.step_rates(0, '{"no_such_key": 1}')


def test_sample_sources():
    a = np.array([[0.8, 0.1, 0.1], [0.1, 0.8, 0.1], [0.1, 0.1, 0.8]])
    draws = [pyrogrid.sample_sources(a, seed) for seed in range(2000)]
    self_rate = np.mean([[s[j] == j for j in range(3)] for s in draws])
    assert abs(self_rate - 0.8) < 0.03


def test_dataset_files(dataset):
    manifest = json.loads((dataset / "manifest.json").read_text())
    assert len(manifest["agents"]) == 2
    assert manifest["train_weeks"] == 24


def test_train_evaluate_predict_report(tmp_path, dataset, train_config):
    run = tmp_path / "runs" / "proposed"
    log = pyrogrid.train(dataset, run, config=train_config)
    assert "episode 1/1" in log
    ckpt = run / "checkpoint_001.pgck"
    params = pyrogrid.load_checkpoint(ckpt)
    assert any(name.startswith("agent0.") for name in params)
    assert any(name.startswith("actor.") for name in params)
    assert all(np.all(np.isfinite(v)) for v in params.values())

    rows = pyrogrid.evaluate(ckpt, dataset, tmp_path / "eval")
    assert len(rows) == 2 * 4 + 1
    assert rows[-1]["agent"] == "mean"
    again = pyrogrid.evaluate(ckpt, dataset, tmp_path / "eval2")
    assert rows == again

    images = pyrogrid.predict(ckpt, dataset, 5, tmp_path / "maps")
    assert len(images) == 2 * 5
    img = pyrogrid.read_pgm(images[1])
    assert img.shape == (16, 16)
    assert np.all((img >= 0.0) & (img <= 1.0))

    pyrogrid.train(dataset, tmp_path / "runs" / "logistic", config=train_config, logistic=True)
    report = pyrogrid.report(tmp_path / "runs")
    assert sorted(r["method"] for r in report) == ["logistic", "proposed"]


def test_untrained_logistic_predicts_half(tmp_path, dataset, train_config):
    run = tmp_path / "logistic"
    pyrogrid.train(dataset, run, config=train_config, episodes=0, logistic=True)
    for path in pyrogrid.predict(run / "checkpoint_000.pgck", dataset, 0, tmp_path / "maps"):
        raw = path.read_bytes()
        assert raw.startswith(b"P5\n16 16\n255\n")
        assert set(raw[len(b"P5\n16 16\n255\n"):]) == {128}


def test_errors(tmp_path, dataset):
    with pytest.raises(pyrogrid.PyrogridError):
        pyrogrid.train(tmp_path / "missing", tmp_path / "out")
    with pytest.raises(pyrogrid.DataError):
        pyrogrid.report(tmp_path)
    with pytest.raises(pyrogrid.ConfigError):
        pyrogrid.train(dataset, tmp_path / "out", static=True, logistic=True)
