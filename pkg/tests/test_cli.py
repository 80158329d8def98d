import json

import pytest

from mqsense import __version__
from mqsense.cli import main

SMALL = {
    "pipelines": ["basis-info", "build-cluster", "mqc-scan", "jitter-sweep", "qfi-sweep", "oracle-validate"],
    "n_spins": 4,
    "scan": {"n_phi": 61},
    "jitter_sweep": {"deltas": [0.0, 0.2, 0.4], "m_c": [2, 4], "noise_rms": 1e-6},
    "qfi_sweep": {"m_c": [2, 4], "p": [0.5]},
    "oracle": {"n_spins": [2, 3], "samples": 2},
}


def _write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(path)


def test_version(capsys):
    assert main(["version"]) == 0
    assert capsys.readouterr().out.strip() == __version__


def test_validate_ok(tmp_path, capsys):
    assert main(["validate", _write(tmp_path, SMALL)]) == 0
    assert "ok" in capsys.readouterr().out


@pytest.mark.parametrize("doc, fragment", [
    ({"pipelines": [], "n_spins": 4}, "pipelines"),
    ({"pipelines": ["basis-info"], "n_spins": 4, "evolution": {"loops_prepare": -1}}, "evolution.loops_prepare"),
    ({"pipelines": ["basis-info"], "n_spins": 4, "bogus": 1}, "bogus"),
    ({"pipelines": ["basis-info"], "n_spins": 4, "cluster": {"max_order": 6}}, "exceeds n_spins"),
    ('{"pipelines": ["basis-info"],\n "n_spins": 4,\n "scan": {"n_phi": 10,}}', "line 3 column"),
])
def test_validate_errors(tmp_path, capsys, doc, fragment):
    assert main(["validate", _write(tmp_path, doc)]) == 2
    err = capsys.readouterr().err
    assert err.startswith("config error:") and fragment in err


def test_missing_file(tmp_path, capsys):
    assert main(["validate", str(tmp_path / "nope.json")]) == 2


def _csvs(out):
    return {p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.suffix in (".csv", ".json")
            and p.name != "manifest.json"}


def test_run_is_deterministic_across_threads(tmp_path):
    cfg = _write(tmp_path, SMALL)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", cfg, "--out", str(a), "--threads", "1"]) == 0
    assert main(["run", cfg, "--out", str(b), "--threads", "3"]) == 0
    files_a, files_b = _csvs(a), _csvs(b)
    assert files_a == files_b
    for name in ("basis.csv", "cluster_spectrum.csv", "scan.csv", "spectrum.csv", "distortion.csv", "qfi.csv",
                 "oracle.csv", "threshold.json"):
        assert name in files_a
    manifest = json.loads((a / "manifest.json").read_text())
    assert set(manifest["outputs"]) >= set(files_a)
    assert manifest["threads"] == 1
    first = files_a["basis.csv"].decode().splitlines()[0]
    assert first == f"# run_id={manifest['run_id']}; manifest=manifest.json"
    oracle_rows = files_a["oracle.csv"].decode().splitlines()[2:]
    assert oracle_rows and all(r.endswith(",true") for r in oracle_rows)


def test_seed_override_changes_run_id(tmp_path):
    cfg = _write(tmp_path, {"pipelines": ["basis-info"], "n_spins": 2})
    main(["run", cfg, "--out", str(tmp_path / "x"), "--seed", "1"])
    main(["run", cfg, "--out", str(tmp_path / "y"), "--seed", "2"])
    ids = [json.loads((tmp_path / d / "manifest.json").read_text())["run_id"] for d in ("x", "y")]
    assert ids[0] != ids[1]


def test_plots_written(tmp_path):
    pytest.importorskip("matplotlib")
    cfg = _write(tmp_path, {"pipelines": ["build-cluster"], "n_spins": 4, "plots": True})
    out = tmp_path / "p"
    assert main(["run", cfg, "--out", str(out)]) == 0
    assert (out / "cluster_spectrum.svg").exists()
