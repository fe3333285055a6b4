"""Serialization: bit-exact snapshot round trips and stable run ids."""

import dataclasses
import json

import numpy as np
import pytest

from rrgas.config import RunConfig
from rrgas.constitutive import PhysParams
from rrgas.diagnostics import DiagnosticsRecord
from rrgas.mesh import Grid, State
from rrgas.output import (
    DIAG_COLUMNS,
    SNAPSHOT_COLUMNS,
    fmt,
    read_diagnostics,
    read_snapshot,
    run_id,
    write_diagnostics,
    write_failure,
    write_snapshot,
)


def awkward_state(n=6):
    # Values chosen to stress the formatter: negatives, subnormal-ish
    # magnitudes, repeating binary fractions.
    rng = np.random.default_rng(31)
    s = State(
        Grid(n),
        0.3 + rng.random(n),
        0.1 + rng.random(n),
        rng.random(n),
        rng.standard_normal(n + 1) * 1e-3,
        t=0.1 + 1e-13,
        a_pos=-1.0 / 3.0,
    )
    s.v[0] = 2.0 / 3.0
    s.u[2] = -1.2345678901234567e-11
    return s


def test_fmt_round_trips_doubles():
    for x in (1.0 / 3.0, 0.1, -2.5e-300, 7.0, 1e17 + 1):
        assert float(fmt(x)) == x


def test_snapshot_round_trip_bitwise(tmp_path):
    s = awkward_state()
    p = PhysParams()
    path = tmp_path / "snap.csv"
    write_snapshot(path, s, p, run="abc123")
    back, meta = read_snapshot(path)
    np.testing.assert_array_equal(back.v, s.v)
    np.testing.assert_array_equal(back.theta, s.theta)
    np.testing.assert_array_equal(back.z, s.z)
    np.testing.assert_array_equal(back.u, s.u)
    assert back.t == s.t
    assert back.a_pos == s.a_pos
    assert meta["run_id"] == "abc123"
    assert int(meta["n_cells"]) == 6


def test_snapshot_header_carries_physics_echo(tmp_path):
    s = awkward_state()
    p = dataclasses.replace(PhysParams(), k_rate=3.5, cond_model="B", q_cond=1.0)
    path = tmp_path / "snap.csv"
    write_snapshot(path, s, p)
    _, meta = read_snapshot(path)
    assert "k_rate=3.5" in meta["physics"]
    assert "cond_model=B" in meta["physics"]


def test_snapshot_rejects_truncated_file(tmp_path):
    s = awkward_state()
    path = tmp_path / "snap.csv"
    write_snapshot(path, s, PhysParams())
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:-2]) + "\n")  # drop two data rows
    with pytest.raises(ValueError, match="row count"):
        read_snapshot(path)


def test_snapshot_column_layout(tmp_path):
    s = awkward_state()
    path = tmp_path / "snap.csv"
    write_snapshot(path, s, PhysParams())
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    assert lines[0] == ",".join(SNAPSHOT_COLUMNS)
    assert len(lines) == 1 + 6


def test_diagnostics_round_trip(tmp_path):
    rows = [
        DiagnosticsRecord(
            t=0.1 * k, dt=1e-3, e_total=2.0 + k, u_entropy=0.5, v_dissipation=0.25,
            z_l2=0.125, z_diff_accum=0.01 * k, z_react_accum=0.02 * k, width=1.0,
            min_v=0.9, min_theta=0.8, min_z=0.0, max_z=1.0, momentum=1e-17,
        )
        for k in range(3)
    ]
    path = tmp_path / "diag.csv"
    write_diagnostics(path, rows)
    back = read_diagnostics(path)
    assert back == rows


def test_diagnostics_header_is_column_order(tmp_path):
    path = tmp_path / "diag.csv"
    write_diagnostics(path, [])
    assert path.read_text().splitlines()[0] == ",".join(DIAG_COLUMNS)
    assert DIAG_COLUMNS[:2] == ("t", "dt")


def test_diagnostics_rejects_foreign_header(tmp_path):
    path = tmp_path / "diag.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ValueError, match="columns"):
        read_diagnostics(path)


def test_run_id_deterministic_and_sensitive():
    cfg = RunConfig()
    assert run_id(cfg) == run_id(RunConfig())
    assert len(run_id(cfg)) == 12
    other = RunConfig()
    other.n_cells = 300
    assert run_id(other) != run_id(cfg)


def test_write_failure_manifest(tmp_path):
    s = awkward_state()
    path = tmp_path / "failure.json"
    write_failure(path, "step rejected 10 times", s, run="deadbeef0000")
    payload = json.loads(path.read_text())
    assert payload["status"] == "failed"
    assert payload["run_id"] == "deadbeef0000"
    assert payload["t_last"] == s.t
    assert "rejected" in payload["error"]


def test_write_failure_without_state(tmp_path):
    path = tmp_path / "failure.json"
    write_failure(path, "bad config", None, run="x")
    assert json.loads(path.read_text())["t_last"] is None
