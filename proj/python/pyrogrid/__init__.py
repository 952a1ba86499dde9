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

"""Multi-agent wildfire spread prediction with learned sample exchange."""

from ._core import (
    ConfigError,
    DataError,
    NumericError,
    PyrogridError,
    auroc,
    bce,
    evaluate,
    gen_data,
    iou,
    load_checkpoint,
    predict,
    read_pgm,
    report,
    sample_sources,
    step_rates,
    train,
)

__all__ = [
    "ConfigError",
    "DataError",
    "NumericError",
    "PyrogridError",
    "auroc",
    "bce",
    "evaluate",
    "gen_data",
    "iou",
    "load_checkpoint",
    "predict",
    "read_pgm",
    "report",
    "sample_sources",
    "step_rates",
    "train",
]
