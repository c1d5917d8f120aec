# Copyright 2026 The avqa Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import numpy as np
import pytest

import avqa


def test_rank_metrics():
    assert avqa.srocc([1, 2, 3], [1, 2, 3]) == 1.0
    assert avqa.srocc([1, 2, 3], [3, 2, 1]) == -1.0
    assert avqa.krocc([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(4 / 6, abs=1e-12)
    assert avqa.rmse([1, 2], [1, 2]) == 0.0


def test_constant_input_raises():
    with pytest.raises(avqa.Error):
        avqa.plcc([1, 1, 1], [1, 2, 3])


def test_logistic_fit_and_report():
    mos = [5 + 4.5 * i for i in range(20)]
    pred = [0.02 * m - 0.3 for m in mos]
    fit = avqa.logistic_fit(pred, mos)
    assert avqa.plcc(fit["mapped"], mos) == pytest.approx(1.0, abs=1e-6)
    report = avqa.evaluate(pred, mos)
    assert report["n"] == 20
    assert report["srocc"] == 1.0


def test_reference_constants():
    assert avqa.REFERENCE == {"srocc": 0.8245, "plcc": 0.8590, "krocc": 0.6436, "rmse": 0.5772}


def test_screening_and_mos():
    rows = []
    for s in range(20):
        for v in range(4):
            rows.append((f"s{s}", f"v{v}", 40.0 + v + (s % 3)))
    assert avqa.screen_subjects(rows) == []
    mos = avqa.compute_mos(rows)
    assert set(mos) == {"v0", "v1", "v2", "v3"}
    assert mos["v0"]["n_valid"] == 20


def test_siti_constant_and_one_pixel():
    flat = np.full((3, 16, 32), 80.0)
    r = avqa.siti(flat)
    assert r["si_max"] == 0.0 and r["ti_max"] == 0.0
    clip = np.zeros((2, 10, 10))
    clip[1, 3, 7] = 255.0
    assert avqa.siti(clip)["ti"][0] == pytest.approx(255 * math.sqrt(99) / 100, abs=1e-12)


def test_erp_partition():
    bands = avqa.partition_erp(32, 4)
    assert bands[0][0] == 0 and bands[-1][1] == 32
    prior = avqa.latitude_prior(32, 4)
    assert sum(prior) == pytest.approx(1.0)
    assert prior[0] < prior[1]


def test_log_mel_tone():
    t = np.arange(16000) / 16000.0
    mel = avqa.log_mel(0.5 * np.sin(2 * math.pi * 1000.0 * t), 16000)
    assert mel.shape == (98, 64)
    fb = avqa.mel_filterbank()
    assert fb.shape == (64, 257)
    assert avqa.mel_to_hz(avqa.hz_to_mel(1234.5)) == pytest.approx(1234.5)


def test_hm_stats():
    t = [i / 120.0 for i in range(240)]
    yaw = [10.0 * x for x in t]
    s = avqa.hm_stats(t, yaw, [0.0] * 240, [0.0] * 240)
    assert s["yaw_speed_mean"] == pytest.approx(10.0, abs=1e-9)
    assert sum(s["yaw_histogram"]) == pytest.approx(1.0)


def test_cli_pipeline(tmp_path):
    assert avqa.synth_fixture(str(tmp_path), sequences=6) == 6
    cfg = str(tmp_path / "avqa.cfg")
    code, _, _ = avqa.run(["process-scores", "-c", cfg])
    assert code == 0
    code, _, err = avqa.run(["train", "-c", cfg, "--set", "model.epochs=1", "--set", "train_on=all"])
    assert code == 0, err
    assert (tmp_path / "out" / "model.avqc").exists()
    code, _, _ = avqa.run(["train", "-c", cfg, "--set", "bogus.key=1"])
    assert code == 2
