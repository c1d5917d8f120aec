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

"""No-reference audio-visual quality assessment for 360-degree video."""

from ._avqa import (
    REFERENCE,
    Error,
    compute_mos,
    evaluate,
    hm_stats,
    hz_to_mel,
    krocc,
    latitude_prior,
    log_mel,
    logistic_fit,
    mel_filterbank,
    mel_to_hz,
    partition_erp,
    plcc,
    rmse,
    run,
    screen_subjects,
    siti,
    srocc,
    synth_fixture,
)

__all__ = [
    "REFERENCE",
    "Error",
    "compute_mos",
    "evaluate",
    "hm_stats",
    "hz_to_mel",
    "krocc",
    "latitude_prior",
    "log_mel",
    "logistic_fit",
    "mel_filterbank",
    "mel_to_hz",
    "partition_erp",
    "plcc",
    "rmse",
    "run",
    "screen_subjects",
    "siti",
    "srocc",
    "synth_fixture",
]
