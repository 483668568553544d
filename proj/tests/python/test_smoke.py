# Copyright 2026 The quipsim Authors
# SPDX-License-Identifier: Apache-2.0

import json
import os
from pathlib import Path

import pytest

import quipsim

ROOT = Path(os.environ.get("QUIP_SOURCE_DIR", Path(__file__).resolve().parents[2]))


def star_config(units=1, rate=20.0, drain=True):
    return json.dumps({
        "topology": {"kind": "hub_and_spoke", "end_nodes": 4, "length_km": 5, "bsm_units": units},
        "demand": {"rate": rate, "duration_s": 0.5, "window_s": [0, 0.5], "drain": drain},
        "seed": 5,
    })


def test_compose_bell_is_xor():
    for b1 in range(4):
        for b2 in range(4):
            for m in range(4):
                assert quipsim.compose_bell(b1, b2, m) == b1 ^ b2 ^ m


def test_shipped_programs_validate():
    for name in ("endnode.json", "router.json", "hub.json"):
        canonical = quipsim.validate_program((ROOT / "programs" / name).read_text())
        assert json.loads(canonical)["__meta__"]["target"] == "v1quantum"


def test_invalid_program_raises_with_code():
    with pytest.raises(quipsim.QuipError) as err:
        quipsim.validate_program('{"header_types": 3}')
    assert err.value.code == "MalformedDocument"


def test_processor_runs_a_golden_program():
    doc = json.loads((ROOT / "tests" / "golden" / "06_table_hit_miss_default.json").read_text())
    proc = quipsim.Processor(json.dumps(doc["program"]))
    proc.table_insert("t", [1], "set_b", [0x1111])
    assert proc.table_lookup("t", [1]) == (True, "set_b", [0x1111])
    pkt = proc.parse(bytes.fromhex("010000aa"))
    for pipe in ("ingress", "egress"):
        proc.execute(pipe, pkt)
    assert proc.get(pkt, "h", "b") == 0x1111
    assert proc.deparse(pkt) == bytes.fromhex("011111aa")
    assert pkt.payload == b"\xaa"


def test_run_is_deterministic_and_correct():
    a = quipsim.run(star_config())
    b = quipsim.run(star_config())
    assert a["trace_hash"] == b["trace_hash"]
    assert a["csv"] == b["csv"]
    assert a["outstanding"] == 0
    assert a["ledger_violations"] == 0
    assert a["deliveries"]["objects"] > 0
    assert a["deliveries"]["mismatched"] == 0
    done = [r for r in a["requests"] if r["complete_ns"] is not None]
    assert len(done) == len(a["requests"]) > 0
    assert 0.012 < a["mean_execution_s"] < 0.018


def test_seed_override_changes_demand():
    a = quipsim.run(star_config(), seed=5)
    b = quipsim.run(star_config(), seed=6)
    assert a["trace_hash"] != b["trace_hash"]


def test_bad_config_raises():
    with pytest.raises(quipsim.QuipError) as err:
        quipsim.run(json.dumps({"topology": {"kind": "ring"}, "demand": {"rate": 1}}), seed=1)
    assert err.value.code == "InvalidConfig"


def test_sweep_writes_summary(tmp_path):
    cfg = json.loads(star_config(drain=False))
    cfg["demand"]["repetitions"] = 2
    cfg["sweep"] = {"bsm_units": [1, 2], "rate": [20]}
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps(cfg))
    rows = quipsim.sweep(str(path), str(tmp_path / "out"))
    assert len(rows) == 4
    assert not any(r["failed"] for r in rows)
    assert (tmp_path / "out" / "summary.csv").exists()
    again = quipsim.sweep(str(path), str(tmp_path / "out"))
    assert all(r["resumed"] for r in again)
