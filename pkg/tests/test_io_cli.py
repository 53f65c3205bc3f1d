import json
import math

import numpy as np
import pytest

from icqnls import io as icio
from icqnls.cli import main
from icqnls.diagnostics import DiagnosticsRecord
from icqnls.grid import WaveField, make_grid
from icqnls.scenarios import ConfigError


def _rand_field(n=32, L=4.0, seed=0):
    rng = np.random.default_rng(seed)
    g = make_grid(n, L)
    return WaveField(g, rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))


# --- checkpoints ------------------------------------------------------------------

def test_checkpoint_roundtrip(tmp_path):
    u = _rand_field()
    path = tmp_path / "u.icqn"
    icio.checkpoint_write(u, 1.25, path)
    v, t = icio.checkpoint_read(path)
    assert t == 1.25
    assert v.grid == u.grid
    assert np.array_equal(v.samples, u.samples)
    assert icio.checkpoint_bytes(v, t) == path.read_bytes()
    assert len(path.read_bytes()) == icio.HEADER_BYTES + 16 * 32 * 32


def test_checkpoint_truncated(tmp_path):
    data = icio.checkpoint_bytes(_rand_field(), 0.0)
    with pytest.raises(icio.CheckpointError, match="payload length mismatch"):
        icio.checkpoint_parse(data[:-8])


def test_checkpoint_wrong_magic():
    data = icio.checkpoint_bytes(_rand_field(), 0.0)
    with pytest.raises(icio.CheckpointError, match="not an ICQN checkpoint"):
        icio.checkpoint_parse(b"XXXX" + data[4:])


def test_checkpoint_header_fields():
    hdr = icio.checkpoint_header(icio.checkpoint_bytes(_rand_field(n=16, L=2.0), 3.5))
    assert hdr == {"magic": "ICQN", "version": 1, "n": 16, "L": 2.0, "t": 3.5}


# --- diagnostics CSV --------------------------------------------------------------

def _rec(t):
    return DiagnosticsRecord(t, math.pi, 1 / 3, -0.1, 2 ** 0.5, 1e-300, 7.0, 0.05, 1e-17, 0.0)


def test_csv_empty_and_single(tmp_path):
    assert icio.diagnostics_csv([]).splitlines() == [",".join(DiagnosticsRecord.columns())]
    assert len(icio.diagnostics_csv([_rec(0.0)]).splitlines()) == 2


def test_csv_roundtrip_exact(tmp_path):
    recs = [_rec(0.1 * k) for k in range(5)]
    path = tmp_path / "d.csv"
    icio.emit_diagnostics(recs, path)
    assert icio.read_diagnostics(path) == recs


# --- config schema -----------------------------------------------------------------

def _doc(**over):
    doc = {
        "schema_version": 1, "seed": 0,
        "grid": {"n": 64, "L": 20.0},
        "fields": {"b1": 0.25, "b2": 1.0},
        "evolve": {"dt": 0.05, "T": 1.0, "record_stride": 2},
        "scenario": {"kind": "decay", "initial": {"amplitude": 0.1}},
    }
    for k, v in over.items():
        doc[k] = v
    return doc


def test_config_roundtrip():
    rc = icio.parse_config(_doc())
    again = icio.parse_config(json.loads(json.dumps(icio.config_document(rc))))
    assert again == rc


@pytest.mark.parametrize("mutate,msg", [
    (lambda d: d["grid"].update(foo=1), "unknown key grid.foo"),
    (lambda d: d["fields"].update(b1=-1), "fields.b1"),
    (lambda d: d["grid"].update(n=100), "power of two"),
    (lambda d: d["evolve"].update(dt=-0.1), "evolve.dt"),
    (lambda d: d["fields"].update(sign1=0), "fields.sign1"),
    (lambda d: d["scenario"].update(knobs={"bogus": 1}), "scenario.knobs"),
    (lambda d: d.pop("scenario"), "scenario.kind"),
    (lambda d: d.update(schema_version=2), "schema_version"),
])
def test_config_errors_name_field(mutate, msg):
    d = _doc()
    mutate(d)
    with pytest.raises(ConfigError, match=msg):
        icio.parse_config(d)


# --- command line --------------------------------------------------------------------

def _write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def _scattering_doc():
    return _doc(grid={"n": 64, "L": 40.0}, evolve={"dt": 0.05, "T": 2.0, "record_stride": 2},
                scenario={"kind": "scattering", "initial": {"width": 3.0},
                          "knobs": {"monotone_after": 0.5}})


def test_cli_run_scattering(tmp_path):
    out = tmp_path / "out"
    code = main(["run", _write(tmp_path, _scattering_doc()), "--out", str(out)])
    verdict = json.loads((out / "verdict.json").read_text())
    assert code == 0 and verdict["passed"]
    for name in ("diagnostics.csv", "config.json", "phi_plus.icqn", "meta.json"):
        assert (out / name).exists()


def test_cli_validation_exit(tmp_path, capsys):
    doc = _doc()
    doc["fields"]["b1"] = -1
    assert main(["run", _write(tmp_path, doc)]) == 2
    assert "fields.b1" in capsys.readouterr().err


def test_cli_blowup_is_expected_termination(tmp_path):
    doc = _doc(grid={"n": 128, "L": 8.0},
               fields={"b1": 0.0, "sign1": -1, "b2": 0.0, "sign2": -1},
               evolve={"dt": 2e-4, "T": 0.3, "record_stride": 10, "blowup_gradient_threshold": 3.0},
               scenario={"kind": "blowup", "initial": {"amplitude": 2.0}})
    out = tmp_path / "b"
    assert main(["run", _write(tmp_path, doc), "--out", str(out)]) == 0
    v = json.loads((out / "verdict.json").read_text())
    assert v["termination"].startswith("blowup_detected")


def test_cli_checkpoints_and_inspect(tmp_path, capsys):
    doc = _doc(output={"checkpoint_stride": 2, "emit_plots_data": True})
    out = tmp_path / "c"
    assert main(["run", _write(tmp_path, doc), "--out", str(out)]) == 0
    cks = sorted((out / "checkpoints").glob("*.icqn"))
    assert cks and (out / "plot_data.json").exists()
    capsys.readouterr()
    assert main(["inspect", str(cks[0])]) == 0
    assert json.loads(capsys.readouterr().out)["magic"] == "ICQN"
    bad = tmp_path / "bad.icqn"
    bad.write_bytes(b"nope")
    assert main(["inspect", str(bad)]) == 2


def test_cli_deterministic(tmp_path):
    cfg = _write(tmp_path, _doc())
    main(["run", cfg, "--out", str(tmp_path / "a")])
    main(["run", cfg, "--out", str(tmp_path / "b")])
    a = (tmp_path / "a" / "diagnostics.csv").read_bytes()
    assert a == (tmp_path / "b" / "diagnostics.csv").read_bytes()


def test_cli_unknown_suite():
    with pytest.raises(SystemExit) as exc:
        main(["verify", "everything"])
    assert exc.value.code == 2


def test_cli_verify_identities(tmp_path):
    report = tmp_path / "r.json"
    assert main(["verify", "identities", "--n", "128", "--report", str(report)]) == 0
    data = json.loads(report.read_text())
    names = {c["name"] for c in data["checks"]}
    assert {"parseval", "virial", "dilation"} <= names
    assert all(c["passed"] for c in data["checks"])


def test_cli_verify_inequalities(tmp_path):
    report = tmp_path / "r.json"
    assert main(["verify", "inequalities", "--seed", "7", "--count", "10", "--report", str(report)]) == 0
    data = json.loads(report.read_text())
    assert len(data["checks"]) == 3
    assert all(c["refinement_change"] < 0.1 for c in data["checks"])


def test_cli_sweep(tmp_path):
    out = tmp_path / "sw"
    code = main(["sweep", _write(tmp_path, _doc()), "--param", "bogus=1", "--out", str(out)])
    assert code == 2
    code = main(["sweep", _write(tmp_path, _doc()), "--param", "fields.b1=0.25,0.5", "--out", str(out)])
    summary = json.loads((out / "sweep.json").read_text())
    assert code == 0
    assert [s["params"]["fields.b1"] for s in summary] == [0.25, 0.5]
    assert (out / "b1=0.5" / "verdict.json").exists()
