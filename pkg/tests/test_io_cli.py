import json
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rdmc import io
from rdmc.cli import main
from rdmc.config import canonical_json, params_hash, parse_config
from rdmc.core import ConfigError, FieldState
from rdmc.fixtures import bundled_path, bundled_raw, fixture_raw


def _write(tmp_path, raw, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(raw))
    return str(path)


# -- snapshot format ---------------------------------------------------------


def test_snapshot_header_bytes():
    state = FieldState(0.25, 0.1, np.arange(6.0).reshape(2, 3))
    data = io.encode_snapshot(state)
    assert data[:4] == b"RDMC"
    assert struct.unpack_from("<Iqqq", data, 4) == (1, 1, 3, 2)
    assert struct.unpack_from("<dd", data, 32) == (0.25, 0.1)
    assert len(data) == 48 + 6 * 8


@settings(max_examples=40, deadline=None)
@given(u=arrays(float, st.tuples(st.integers(1, 3), st.integers(1, 5), st.integers(1, 4)),
                elements=st.floats(0, 1e6)),
       t=st.floats(0, 100), eps=st.floats(0, 0.99))
def test_snapshot_round_trip(u, t, eps):
    back = io.decode_snapshot(io.encode_snapshot(FieldState(t, eps, u)))
    assert back.t == t and back.eps == eps
    np.testing.assert_array_equal(back.u, u)


def test_snapshot_rejects_corruption():
    data = io.encode_snapshot(FieldState(0.0, 0.0, np.ones((1, 4))))
    with pytest.raises(io.SnapshotError):
        io.decode_snapshot(b"XXXX" + data[4:])
    with pytest.raises(io.SnapshotError):
        io.decode_snapshot(data[:-8])


def test_snapshot_csv_mirror(tmp_path):
    state = FieldState(0.0, 0.0, np.array([[1.0, 2.0], [3.0, 4.5]]))
    io.write_snapshot(tmp_path / "s.rdmc", state, csv_mirror=True)
    rows = io.read_csv(tmp_path / "s.csv")
    assert rows == [{"idx0": "0", "u1": "1.0", "u2": "3.0"}, {"idx0": "1", "u1": "2.0", "u2": "4.5"}]


def test_read_trajectory_missing(tmp_path):
    with pytest.raises(FileNotFoundError):
        io.read_trajectory(tmp_path)


def test_csv_append_writes_one_header(tmp_path):
    path = tmp_path / "t.csv"
    io.write_csv(path, ("a", "b"), [{"a": 1, "b": 2}])
    io.write_csv(path, ("a", "b"), [{"a": 3, "b": 4}], append=True)
    assert path.read_text() == "a,b\n1,2\n3,4\n"


# -- configuration -----------------------------------------------------------


def test_params_hash_is_prefix_of_canonical_sha256():
    import hashlib

    raw = bundled_raw("reversible_ok.json")
    digest = hashlib.sha256(canonical_json(raw).encode()).hexdigest()
    assert params_hash(raw) == digest[:16]
    shuffled = dict(reversed(list(raw.items())))
    assert params_hash(shuffled) == params_hash(raw)


def test_parse_config_rejects_unknown_keys():
    raw = fixture_raw("reversible")
    raw["bogus"] = 1
    with pytest.raises(ConfigError):
        parse_config(raw)


def test_seed_override():
    raw = fixture_raw("reversible")
    assert parse_config(raw, seed=7).seed == 7


# -- command line ------------------------------------------------------------


def test_check_ok_and_bad(tmp_path, capsys):
    assert main(["check", str(bundled_path("reversible_ok.json")), "--out", str(tmp_path)]) == 0
    rows = io.read_csv(tmp_path / "conditions.csv")
    assert list(rows[0]) == list(io.CONDITION_COLUMNS)
    assert all(r["verdict"] == "pass" for r in rows)
    assert main(["check", str(bundled_path("reversible_bad.json"))]) == 1
    out = capsys.readouterr().out
    assert "i=1" in out and "forward" in out


def test_usage_errors(tmp_path):
    assert main([]) == 2
    assert main(["frobnicate", "x.json"]) == 2
    assert main(["check", str(tmp_path / "missing.json")]) == 2
    assert main(["check", _write(tmp_path, {}, "empty.json")]) == 2
    (tmp_path / "broken.json").write_text("{not json")
    assert main(["run", str(tmp_path / "broken.json")]) == 2
    assert main(["run", str(bundled_path("reversible_ok.json")), "--threads", "0"]) == 2


def test_unwritable_output_dir(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    cfg = _write(tmp_path, fixture_raw("reversible", T_end=0.0))
    assert main(["run", cfg, "--out", str(blocker / "sub")]) == 2


def test_run_T_zero(tmp_path):
    cfg = _write(tmp_path, fixture_raw("reversible", T_end=0.0))
    out = tmp_path / "out"
    assert main(["run", cfg, "--out", str(out)]) == 0
    assert len(io.read_trajectory(out)) == 1
    rows = io.read_csv(out / "diagnostics.csv")
    assert rows[0]["estimate_id"] == "mass_bound" and rows[0]["verdict"] == "pass"


def test_run_writes_snapshots_and_mass_rows(tmp_path):
    cfg = _write(tmp_path, fixture_raw("power_law", T_end=0.1, snapshot_every=20))
    out = tmp_path / "out"
    assert main(["run", cfg, "--out", str(out), "--csv"]) == 0
    snaps = io.read_trajectory(out)
    assert snaps[-1].t == 0.1
    assert (out / "snapshots" / "snap_00000.csv").exists()
    rows = io.read_csv(out / "diagnostics.csv")
    assert list(rows[0]) == list(io.ESTIMATE_COLUMNS)
    assert rows[0]["verdict"] == "pass"
    assert {r["i"] for r in rows[1:]} == {"1", "2"}
    meta = json.loads((out / "run.json").read_text())
    assert meta["params_hash"] == params_hash(json.loads(open(cfg).read()))


def test_run_then_verify_zero_reaction(tmp_path):
    raw = fixture_raw("reversible", T_end=0.1)
    raw["family"] = {"type": "reversible", "p": [1, 1], "q": [1, 1], "k1": 1.0, "k2": 1.0}
    cfg = _write(tmp_path, raw)
    out = tmp_path / "out"
    assert main(["run", cfg, "--out", str(out)]) == 0
    assert main(["verify", cfg, "--out", str(out)]) == 0
    rows = io.read_csv(out / "diagnostics.csv")
    assert all(r["verdict"] == "pass" for r in rows)
    assert any(r["estimate_id"].startswith("renorm[") for r in rows)


def test_verify_detects_mismatch(tmp_path):
    cfg = _write(tmp_path, fixture_raw("reversible", T_end=0.05))
    out = tmp_path / "out"
    assert main(["run", cfg, "--out", str(out)]) == 0
    assert main(["verify", cfg, "--out", str(out), "--seed", "3"]) == 0
    other = _write(tmp_path, fixture_raw("reversible", T_end=0.05, eps=0.2), "other.json")
    assert main(["verify", other, "--out", str(out)]) == 1


def test_verify_without_snapshots(tmp_path):
    cfg = _write(tmp_path, fixture_raw("reversible", T_end=0.05))
    assert main(["verify", cfg, "--out", str(tmp_path / "nothing")]) == 2


def test_sweep_bad_eps_list(tmp_path):
    raw = fixture_raw("reversible", T_end=0.05)
    raw["eps_list"] = [0.1, 0.2, 0.05]
    assert main(["sweep", _write(tmp_path, raw), "--out", str(tmp_path)]) == 2
    del raw["eps_list"]
    assert main(["sweep", _write(tmp_path, raw), "--out", str(tmp_path)]) == 2


def test_sweep_T_zero(tmp_path):
    raw = fixture_raw("reversible", T_end=0.0)
    raw["eps_list"] = [0.3, 0.2, 0.1]
    assert main(["sweep", _write(tmp_path, raw), "--out", str(tmp_path)]) == 0
    rows = io.read_csv(tmp_path / "sweep.csv")
    assert len(rows) == 6 and all(r["status"] == "ok" for r in rows)
    assert all(float(r["lp_norm"]) == 0.0 for r in rows)


def test_outputs_bit_identical_across_runs(tmp_path, monkeypatch):
    raw = fixture_raw("lotka_volterra", T_end=0.1)
    raw["eps_list"] = [0.3, 0.2, 0.1]
    cfg = _write(tmp_path, raw)
    outs = []
    for n, threads in enumerate(("1", "3")):
        out = tmp_path / f"o{n}"
        monkeypatch.setenv("RDMC_THREADS", threads)
        assert main(["run", cfg, "--out", str(out)]) == 0
        assert main(["verify", cfg, "--out", str(out)]) == 0
        assert main(["sweep", cfg, "--out", str(out)]) == 0
        outs.append(out)
    a, b = outs
    assert (a / "diagnostics.csv").read_bytes() == (b / "diagnostics.csv").read_bytes()
    for fa, fb in zip(sorted((a / "snapshots").iterdir()), sorted((b / "snapshots").iterdir())):
        assert fa.read_bytes() == fb.read_bytes()
    # wall-clock runtime is the only column allowed to differ
    strip = lambda rows: [{k: v for k, v in r.items() if k != "runtime_seconds"} for r in rows]
    assert strip(io.read_csv(a / "sweep.csv")) == strip(io.read_csv(b / "sweep.csv"))
