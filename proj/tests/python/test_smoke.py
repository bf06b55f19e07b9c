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

import csv
import io

import pytest

import padgsim


def small(**strategy):
    return {
            "name": "py",
            "model": "llama-30b",
            "device": "l20",
            "cluster": {"instances": 2},
            "workload": {"preset": "sharegpt", "rate": 1.0, "duration": 20},
            "strategy": {"name": "padg", **strategy},
            "seed": 3,
    }


def test_kv_bytes_per_token():
    # 2 (K and V) * 60 layers * 6656 hidden * 2 bytes
    assert padgsim.kv_bytes_per_token("llama-30b") == 2 * 60 * 6656 * 2


def test_required_bandwidth_is_linear():
    one = padgsim.required_kv_bandwidth("llama-30b", 1.0)
    assert one == padgsim.kv_bytes_per_token("llama-30b")
    assert padgsim.required_kv_bandwidth("llama-30b", 10.0) == pytest.approx(
            10 * one)


@pytest.mark.parametrize("name", padgsim.strategies)
def test_simulate_every_strategy(name):
    out = padgsim.simulate(small(), strategy=name)
    assert out["strategy"] == name
    assert out["quiescent"]
    rows = list(csv.DictReader(io.StringIO(out["requests_csv"])))
    assert len(rows) == out["requests"] > 0
    assert 0.0 <= out["attainment"] <= 1.0


def test_simulate_is_deterministic():
    a = padgsim.simulate(small())
    b = padgsim.simulate(small())
    assert a["requests_csv"] == b["requests_csv"]
    assert a["routing_csv"] == b["routing_csv"]


def test_validation_error_names_field():
    with pytest.raises(padgsim.ValidationError, match="strategy.name"):
        padgsim.simulate(small(), strategy="round-robin")
    with pytest.raises(padgsim.ParseError):
        padgsim.simulate("{not json")
    assert issubclass(padgsim.ValidationError, padgsim.Error)


def test_sweep_returns_csv():
    cfg = small()
    cfg["sweep"] = {"strategies": ["padg"], "rates": [0.5, 1.0],
                                    "percentiles": [0.5]}
    rows = list(csv.DictReader(io.StringIO(padgsim.sweep(cfg))))
    assert [r["strategy"] for r in rows] == ["padg"]
