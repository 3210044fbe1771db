import json
import os
import pathlib

import pytest

import linkemu

ROOT = pathlib.Path(__file__).resolve().parents[2]


def scenario(name):
    return linkemu.load(ROOT / "scenarios" / name)


def test_normalize_roundtrip():
    text = linkemu.normalize(scenario("bandwidth_on_demand.json"))
    assert linkemu.normalize(text) == text
    doc = json.loads(text)
    assert len(doc["schedule"]) == 6


def test_parse_error_is_value_error():
    with pytest.raises(ValueError):
        linkemu.normalize("{ broken")


def test_verify_flags_dangling_node():
    doc = json.loads(scenario("asymmetry.json"))
    doc["links"][0]["b"]["node"] = "gw9"
    rows = {r["constraint"]: r for r in linkemu.verify(json.dumps(doc))}
    assert not rows["endpoint-exists"]["passed"]
    assert "gw9" in rows["endpoint-exists"]["witness"]


def test_run_is_deterministic():
    a = linkemu.Emulator(scenario("asymmetry.json"), seed=3)
    b = linkemu.Emulator(scenario("asymmetry.json"), seed=3)
    sa, sb = a.run(), b.run()
    assert sa["trace_hash"] == sb["trace_hash"]
    assert a.deliveries() == b.deliveries()
    c = a.counters("sat1", "reverse")
    assert c["offered"] == c["delivered"] + c["dropped"] + c["in_flight"]


def test_bandwidth_plateau():
    emu = linkemu.Emulator(scenario("bandwidth_on_demand.json"), seed=1)
    summary = emu.run()
    assert summary["per_kind"]["reconfigure"] == 6
    points = emu.throughput("sat1", "forward")
    mid = [p for t, w, p in points if 40 <= t < 58]
    assert all(abs(p - 14.0) < 0.42 for p in mid)


def test_policies_and_histogram():
    assert linkemu.allocate_cap_clip(20e6, 16e6) == 16e6
    assert linkemu.allocate_maxmin([2e6, 8e6, 10e6], 18e6) == [2e6, 8e6, 8e6]
    h = linkemu.delay_histogram([10, 20, 20, 35], 10)
    assert h["bins"] == [(10.0, 1), (20.0, 2), (30.0, 1)]


def test_cli_entry(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(scenario("asymmetry.json"))
    rc, out, _ = linkemu.main(["run", str(path), "--until", "5", "--out", str(tmp_path / "out")])
    assert rc == 0
    assert (tmp_path / "out" / "throughput.csv").read_text().startswith("window_start_s,link,dir,wire_mbps,payload_mbps\n")
    rc, out, _ = linkemu.main(["report", str(tmp_path / "out"), "--kind", "histogram", "--dir", "reverse"])
    assert rc == 0 and out.startswith("bin_center_ms,count,normal_fit\n")
