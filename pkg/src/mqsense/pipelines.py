"""Configuration-driven pipelines and their deterministic file outputs."""
from __future__ import annotations

import hashlib
import json
import platform
import warnings
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import scipy

from . import __version__, config as configmod, kernels
from .basis import enumerate_basis
from .dynamics import EvolutionConfig, default_phase_grid, phase_scan, prepare, spectrum_from_scan, dephase
from .errors import FitError, NoSensitivityError
from .metrology import estimate_threshold, gaussian_fit, jitter_sweep, qfi_vs_max_order
from .states import ClusterSpec, build_cluster, coherence_spectrum, ghz_state, thermal_state
from .validation import run_checks

MANIFEST = "manifest.json"


def fmt(value) -> str:
    """Locale-free text form: integers verbatim, floats with 17 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


class RunContext:
    """Output directory, run identity and the record of files and warnings."""

    def __init__(self, cfg: dict, out_dir: Path):
        self.cfg = cfg
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        hashed = {k: v for k, v in cfg.items() if k != "threads"}
        self.config_digest = configmod.digest(hashed)
        self.run_id = self.config_digest[:12]
        self.outputs: dict[str, str] = {}
        self.warnings: list[str] = []

    def _record(self, name: str, data: bytes):
        path = self.out / name
        path.write_bytes(data)
        self.outputs[name] = hashlib.sha256(data).hexdigest()

    def write_csv(self, name: str, header, rows):
        lines = [f"# run_id={self.run_id}; manifest={MANIFEST}", ",".join(header)]
        lines += [",".join(fmt(v) for v in row) for row in rows]
        self._record(name, ("\n".join(lines) + "\n").encode("ascii"))

    def write_json(self, name: str, payload):
        doc = {"run_id": self.run_id, "manifest": MANIFEST, "data": payload}
        self._record(name, (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode("utf-8"))

    def plot(self, name: str, draw):
        if not self.cfg["plots"]:
            return
        try:
            import matplotlib

            matplotlib.use("Agg")
            import matplotlib.pyplot as plt
        except ImportError:
            self.warnings.append("plots requested but matplotlib is not installed")
            return
        plt.rcParams["svg.hashsalt"] = self.run_id
        fig, ax = plt.subplots(figsize=(5, 3.5))
        draw(ax)
        fig.tight_layout()
        path = self.out / name
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        self.outputs[name] = hashlib.sha256(path.read_bytes()).hexdigest()

    def manifest(self) -> dict:
        return {
            "run_id": self.run_id,
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "version": __version__,
            "versions": {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__},
            "kernel_backend": kernels.BACKEND,
            "config_digest": self.config_digest,
            "seed": self.cfg["seed"],
            "threads": self.cfg["threads"],
            "parameters": self.cfg,
            "outputs": dict(sorted(self.outputs.items())),
            "warnings": self.warnings,
        }


def _evolution(cfg) -> EvolutionConfig:
    return EvolutionConfig(**cfg["evolution"])


def _seed_state(cfg, basis):
    n = cfg["n_spins"]
    return ghz_state(n, basis) if cfg["seed_state"] == "ghz" else thermal_state(n, basis)


def _spectrum_rows(spec):
    return [(q, v) for q, v in spec.intensities.items()]


def _fit_record(spec):
    try:
        return gaussian_fit(spec).to_dict()
    except FitError as exc:
        return {"error": str(exc)}


def basis_info(cfg, ctx: RunContext):
    basis = enumerate_basis(cfg["n_spins"])
    ctx.write_csv("basis.csv", ["index", "m", "n", "h", "q", "norm"],
                  ((i, m, n, h, m - n, k) for i, m, n, h, k in basis.rows()))
    ctx.write_json("basis_info.json", {"n_spins": basis.n_spins, "dim": basis.dim})


def build_cluster_pipeline(cfg, ctx: RunContext):
    c = cfg["cluster"]
    basis = enumerate_basis(cfg["n_spins"])
    spec = ClusterSpec(cfg["n_spins"], c["max_order"], c["weight_mode"], c["gaussian_width"], c["mixing"])
    rho = dephase(build_cluster(spec, basis), c["dephasing"])
    spectrum = coherence_spectrum(rho, traceless=True)
    if spectrum.total() > 0:
        spectrum = spectrum.normalize()
    ctx.write_csv("cluster_spectrum.csv", ["q", "intensity"], _spectrum_rows(spectrum))
    ctx.write_json("cluster_fit.json", _fit_record(spectrum))
    ctx.plot("cluster_spectrum.svg", lambda ax: (ax.bar(*spectrum.as_arrays()), ax.set_xlabel("q")))


def mqc_scan(cfg, ctx: RunContext):
    basis = enumerate_basis(cfg["n_spins"])
    evo = _evolution(cfg)
    phis = default_phase_grid(cfg["scan"]["n_phi"])
    rho = _seed_state(cfg, basis)
    signals = phase_scan(rho, evo, phis)
    spec = spectrum_from_scan(signals, cfg["scan"]["suppress_zero"], phis=phis, n_spins=cfg["n_spins"])
    ctx.write_csv("scan.csv", ["phi", "signal"], zip(phis, signals))
    ctx.write_csv("spectrum.csv", ["q", "intensity"], _spectrum_rows(spec))
    direct = coherence_spectrum(prepare(rho, evo))
    ctx.write_csv("prepared_spectrum.csv", ["q", "intensity"], _spectrum_rows(direct))
    ctx.write_json("spectrum_fit.json", _fit_record(spec))
    ctx.plot("scan.svg", lambda ax: (ax.plot(phis, signals), ax.set_xlabel("phi (rad)")))
    ctx.plot("spectrum.svg", lambda ax: (ax.bar(*spec.as_arrays()), ax.set_xlabel("q")))


def jitter_sweep_pipeline(cfg, ctx: RunContext):
    js = cfg["jitter_sweep"]
    basis = enumerate_basis(cfg["n_spins"])
    phis = default_phase_grid(cfg["scan"]["n_phi"])
    rows, spectra = jitter_sweep(_seed_state(cfg, basis), _evolution(cfg), js["deltas"], js["m_c"], phis,
                                 suppress_zero=js["suppress_zero"], workers=cfg["threads"])
    ctx.write_csv("distortion.csv", ["delta", "m_c", "D"], ((r["delta"], r["m_c"], r["D"]) for r in rows))
    ctx.write_csv("jitter_spectra.csv", ["delta", "q", "intensity"],
                  ((d, q, v) for d, s in sorted(spectra.items()) for q, v in s.intensities.items()))
    if js["noise_rms"] is not None:
        out = {}
        for m in js["m_c"]:
            pts = [(r["delta"], r["D"]) for r in rows if r["m_c"] == m]
            try:
                out[str(m)] = estimate_threshold(pts, js["noise_rms"])
            except (NoSensitivityError, ValueError) as exc:
                out[str(m)] = {"error": str(exc)}
        ctx.write_json("threshold.json", out)

    def draw(ax):
        for m in js["m_c"]:
            ax.plot(js["deltas"], [r["D"] for r in rows if r["m_c"] == m], marker="o", label=f"m_c={m}")
        ax.set_xlabel("delta / tau")

    ctx.plot("distortion.svg", draw)


def qfi_sweep(cfg, ctx: RunContext):
    qs = cfg["qfi_sweep"]
    basis = enumerate_basis(cfg["n_spins"])
    table = []
    for mode in qs["modes"]:
        rows = qfi_vs_max_order(cfg["n_spins"], qs["m_c"], qs["p"], mode, qs["mixing"], qs["gaussian_width"],
                                basis=basis, workers=cfg["threads"])
        table += [(mode, r["m_c"], r["p"], r["qfi"]) for r in rows]
    ctx.write_csv("qfi.csv", ["mode", "m_c", "p", "qfi"], table)

    def draw(ax):
        for mode in qs["modes"]:
            for p in qs["p"]:
                pts = [(m, f) for md, m, pp, f in table if md == mode and pp == p]
                ax.plot(*zip(*pts), marker="o", label=f"{mode} p={p}")
        ax.set_xlabel("m_c")

    ctx.plot("qfi.svg", draw)


def oracle_validate(cfg, ctx: RunContext):
    oc = cfg["oracle"]
    records = run_checks(oc["n_spins"], oc["samples"], cfg["seed"], oc["checks"])
    ctx.write_csv("oracle.csv", ["test", "n_spins", "tolerance", "max_deviation", "pass"],
                  ((r.test, r.n_spins, r.tolerance, r.max_deviation, r.passed) for r in records))
    ctx.write_json("oracle.json", [r.to_dict() for r in records])


PIPELINE_FUNCS = {
    "basis-info": basis_info,
    "build-cluster": build_cluster_pipeline,
    "mqc-scan": mqc_scan,
    "jitter-sweep": jitter_sweep_pipeline,
    "qfi-sweep": qfi_sweep,
    "oracle-validate": oracle_validate,
}


def run(cfg: dict, out_dir) -> RunContext:
    """Execute every pipeline of a resolved config and write the manifest last."""
    ctx = RunContext(cfg, out_dir)
    for name in cfg["pipelines"]:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            PIPELINE_FUNCS[name](cfg, ctx)
        ctx.warnings += [f"{name}: {w.category.__name__}: {w.message}" for w in caught]
    (ctx.out / MANIFEST).write_text(json.dumps(ctx.manifest(), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return ctx
