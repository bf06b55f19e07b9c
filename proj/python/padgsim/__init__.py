# Copyright 2026 The padgsim Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Python bindings for the padgsim serving-cluster simulator."""

import json as _json

from padgsim._core import (
        Error,
        ParseError,
        ValidationError,
        kv_bytes_per_token,
        required_kv_bandwidth,
        strategies,
)
from padgsim import _core

__all__ = [
        "Error",
        "ParseError",
        "ValidationError",
        "kv_bytes_per_token",
        "required_kv_bandwidth",
        "simulate",
        "strategies",
        "sweep",
]


def _text(config):
    if isinstance(config, (str, bytes)):
        return config
    return _json.dumps(config)


def simulate(config, rate=None, strategy=None, seed=None):
    """Runs one scenario. `config` is a dict or JSON text."""
    return _core.simulate(_text(config), rate, strategy, seed)


def sweep(config):
    """Goodput sweep; returns CSV text."""
    return _core.sweep(_text(config))
