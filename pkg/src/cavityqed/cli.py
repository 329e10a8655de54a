"""Batch front end: YAML job configs in, deterministic CSV sweep data out.

Exit status: 0 ok, 2 configuration, 3 convergence, 4 solver, 5 I/O.
"""
from __future__ import annotations

import argparse
import copy
import hashlib
import math
import os
import sys
import tempfile
import warnings
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import yaml

from . import __version__
from .analysis import (SweepResult, analytic_jcm_levels, ground_state_photons, perturbative_photon_coefficient,
                       rwa_boundary, spectrum_sweep, platform_metrics, MOLECULAR_ROW_NOTE)
from .errors import CavityQEDError, ConfigError, ConvergenceError, SolverError
from .matter1d import PotentialSpec
from .models import (DickeParams, JcmParams, RabiParams, build_dicke, build_gauge_family, build_jcm,
                     build_polaron_rabi, build_rabi, build_truncated_coulomb_tls, grwa_project,
                     resonant_gauge_params)
from .opcore import eig_hermitian, elementary_operators
from .opensys import (KINDS, SPECTRA, build_liouvillian, emission_sweep, gap_sweep,
                      lindblad_series, photodetection_rate, positive_frequency_part, rabi_open_system)

JOBS = ("spectrum", "vacuum", "gauge", "steady", "gap", "regime", "evolve")
MODELS = ("jcm", "rabi", "polaron", "grwa", "coulomb_tls", "dicke")
EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_SOLVER, EXIT_IO = 2, 3, 4, 5
OUTPUT_DIR_ENV = "CAVITYQED_OUTPUT_DIR"
FAST_N_FOCK = 20


def _pos(x):
    return x > 0


def _nonneg(x):
    return x >= 0


def _at_least(n):
    return lambda x: x >= n


# section -> key -> (type, default, check, constraint text)
SCHEMA: dict[str, dict[str, tuple]] = {
    "params": {
        "omega_c": (float, 1.0, _pos, "> 0"),
        "omega_eg": (float, 1.0, _nonneg, ">= 0"),
        "epsilon": (float, 0.0, None, ""),
        "coupling": (float, 0.5, _nonneg, ">= 0"),
        "n_spins": (int, 1, _at_least(1), ">= 1"),
        "A": (float, 50.0, _pos, "> 0"),
        "anharmonicity": (float, 45.0, _pos, "> 0"),
        "mass": (float, 1.0, _pos, "> 0"),
        "initial": (str, "excited", lambda s: s in ("excited", "ground", "photon"), "one of excited, ground, photon"),
    },
    "sweep": {
        "start": (float, 0.0, _nonneg, ">= 0"),
        "stop": (float, 1.5, _nonneg, ">= 0"),
        "count": (int, 151, _at_least(2), ">= 2"),
    },
    "numerics": {
        "n_fock": (int, 40, _at_least(2), ">= 2"),
        "k_levels": (int, 6, _at_least(1), ">= 1"),
        "n_points": (int, 1024, _at_least(64), ">= 64"),
        "n_matter_levels": (int, 8, _at_least(2), ">= 2"),
        "fast": (bool, False, None, ""),
        "compare_jcm": (bool, False, None, ""),
        "relative": (bool, False, None, ""),
    },
    "bath": {
        "gamma0": (float, 1e-3, _nonneg, ">= 0"),
        "T_a": (float, 0.05, _nonneg, ">= 0"),
        "T_c": (float, 0.0, _nonneg, ">= 0"),
        "spectrum": (str, "flat", lambda s: s in SPECTRA, f"one of {', '.join(SPECTRA)}"),
        "kind": (str, "dressed", lambda s: s in KINDS, f"one of {', '.join(KINDS)}"),
        "kinds": (str, ",".join(KINDS), lambda s: all(k in KINDS for k in s.split(",")),
                  f"comma list drawn from {', '.join(KINDS)}"),
    },
}
TOP = {
    "job": (str, None, lambda s: s in JOBS, f"one of {', '.join(JOBS)}"),
    "model": (str, "rabi", lambda s: s in MODELS, f"one of {', '.join(MODELS)}"),
    "output": (str, "", None, ""),
}

# per-job defaults layered over the schema defaults
JOB_DEFAULTS: dict[str, dict[str, dict[str, Any]]] = {
    "spectrum": {},
    "vacuum": {"sweep": {"start": 0.0, "stop": 3.0, "count": 61}, "numerics": {"n_fock": 60}},
    "gauge": {"sweep": {"start": 0.0, "stop": 1.5, "count": 31}, "numerics": {"n_points": 2048}},
    "steady": {"sweep": {"start": 0.0, "stop": 2.5, "count": 26}, "numerics": {"n_fock": 40}},
    "gap": {"sweep": {"start": 1.0, "stop": 2.5, "count": 7}, "numerics": {"n_fock": 40},
            "bath": {"spectrum": "ohmic", "T_a": 0.0}},
    "regime": {},
    "evolve": {"sweep": {"start": 0.0, "stop": 5000.0, "count": 51}, "numerics": {"n_fock": 20},
               "bath": {"T_a": 0.0}},
}


@dataclass
class JobConfig:
    job: str
    model: str = "rabi"
    output: str = ""
    params: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    numerics: dict = field(default_factory=dict)
    bath: dict = field(default_factory=dict)

    def as_dict(self, with_output: bool = True) -> dict:
        d = {"job": self.job, "model": self.model}
        if with_output:
            d["output"] = self.output
        for s in SCHEMA:
            d[s] = dict(getattr(self, s))
        return d

    def hash(self) -> str:
        text = yaml.safe_dump(self.as_dict(with_output=False), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()[:16]


# ----------------------------------------------------------------------------
# parsing

def _key_lines(text: str) -> dict[tuple, tuple[int, int]]:
    """(section, key) -> 1-based (line, column) from the YAML node tree."""
    out = {}
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return out
    if not isinstance(root, yaml.MappingNode):
        return out
    for k, v in root.value:
        out[(k.value,)] = (k.start_mark.line + 1, k.start_mark.column + 1)
        if isinstance(v, yaml.MappingNode):
            for k2, _ in v.value:
                out[(k.value, k2.value)] = (k2.start_mark.line + 1, k2.start_mark.column + 1)
    return out


def _coerce(name, typ, value, loc):
    line, col = loc or (None, None)
    if typ is bool:
        if isinstance(value, bool):
            return value
    elif typ is int:
        if isinstance(value, int) and not isinstance(value, bool):
            return value
    elif typ is float:
        v = None
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            v = float(value)
        elif isinstance(value, str):
            # YAML 1.1 reads exponent forms without a dot (1e-3) as strings
            try:
                v = float(value)
            except ValueError:
                pass
        if v is not None and math.isfinite(v):
            return v
    elif typ is str:
        if isinstance(value, str):
            return value
        if isinstance(value, list) and all(isinstance(x, str) for x in value):
            return ",".join(value)
    raise ConfigError(f"field '{name}' expects {typ.__name__}, got {value!r}", name, line, col)


def parse_config(text: str, job: str | None = None) -> JobConfig:
    """Validate a YAML job document; defaults fill missing keys.

    ``job`` supplies the job kind when the document omits it (the CLI
    subcommand); a conflicting value is an error.
    """
    try:
        doc = yaml.safe_load(text) if text.strip() else {}
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML parse error: {getattr(exc, 'problem', exc)}", None,
                          mark.line + 1 if mark else None, mark.column + 1 if mark else None) from None
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a mapping of keys and sections")
    lines = _key_lines(text)
    valid_top = sorted(list(TOP) + list(SCHEMA))
    for k in doc:
        if k not in TOP and k not in SCHEMA:
            loc = lines.get((k,), (None, None))
            raise ConfigError(f"unknown key '{k}'; valid keys: {', '.join(valid_top)}", str(k), *loc)
    jk = doc.get("job", job)
    if jk is None:
        raise ConfigError("missing 'job'", "job")
    if job is not None and jk != job:
        raise ConfigError(f"config job '{jk}' conflicts with subcommand '{job}'", "job", *lines.get(("job",), (None, None)))
    top = {}
    for k, (typ, default, check, text_c) in TOP.items():
        v = doc.get(k, jk if k == "job" else default)
        v = _coerce(k, typ, v, lines.get((k,)))
        if check is not None and not check(v):
            raise ConfigError(f"field '{k}' must be {text_c}, got {v!r}", k, *lines.get((k,), (None, None)))
        top[k] = v
    sections = {}
    jd = JOB_DEFAULTS[top["job"]]
    for s, keys in SCHEMA.items():
        given = doc.get(s, {}) or {}
        if not isinstance(given, dict):
            raise ConfigError(f"section '{s}' must be a mapping", s, *lines.get((s,), (None, None)))
        for k in given:
            if k not in keys:
                loc = lines.get((s, k), (None, None))
                raise ConfigError(f"unknown key '{k}' in section '{s}'; valid keys: {', '.join(sorted(keys))}",
                                  f"{s}.{k}", *loc)
        vals = {}
        for k, (typ, default, check, text_c) in keys.items():
            v = given.get(k, jd.get(s, {}).get(k, default))
            loc = lines.get((s, k))
            v = _coerce(f"{s}.{k}", typ, v, loc)
            if check is not None and not check(v):
                raise ConfigError(f"field '{s}.{k}' must be {text_c}, got {v!r}", f"{s}.{k}",
                                  *(loc or (None, None)))
            vals[k] = v
        sections[s] = vals
    cfg = JobConfig(top["job"], top["model"], top["output"], **sections)
    _cross_validate(cfg, lines)
    return cfg


def _cross_validate(cfg: JobConfig, lines):
    sw = cfg.sweep
    if sw["stop"] < sw["start"]:
        raise ConfigError(f"sweep.stop ({sw['stop']}) must be >= sweep.start ({sw['start']})", "sweep.stop",
                          *lines.get(("sweep", "stop"), (None, None)))
    if cfg.job == "spectrum" and cfg.model in ("polaron", "grwa", "coulomb_tls") and cfg.params["epsilon"] != 0:
        raise ConfigError("polaron-frame models require params.epsilon = 0", "params.epsilon",
                          *lines.get(("params", "epsilon"), (None, None)))
    if cfg.job in ("steady", "gap", "evolve") and cfg.params["omega_eg"] <= 0:
        raise ConfigError("open-system jobs need params.omega_eg > 0", "params.omega_eg",
                          *lines.get(("params", "omega_eg"), (None, None)))


def serialize_config(cfg: JobConfig) -> str:
    return yaml.safe_dump(cfg.as_dict(), sort_keys=True)


def apply_overrides(cfg: JobConfig, out: str | None = None, n_fock: int | None = None, fast: bool = False) -> JobConfig:
    cfg = copy.deepcopy(cfg)
    if out is not None:
        cfg.output = out
    if fast:
        cfg.numerics["fast"] = True
    if cfg.numerics["fast"] and cfg.job in ("steady", "gap", "evolve"):
        cfg.numerics["n_fock"] = min(cfg.numerics["n_fock"], FAST_N_FOCK)
    if n_fock is not None:
        if n_fock < 2:
            raise ConfigError(f"field 'numerics.n_fock' must be >= 2, got {n_fock}", "numerics.n_fock")
        cfg.numerics["n_fock"] = n_fock
    return cfg


# ----------------------------------------------------------------------------
# CSV

@dataclass
class CsvArtifact:
    header: list[str]
    rows: np.ndarray
    metadata: list[tuple[str, str]]

    def render(self) -> str:
        ncol = len(self.header)
        lines = [",".join(self.header)]
        for r in np.atleast_2d(self.rows):
            if len(r) != ncol:
                raise SolverError("row width differs from header")
            lines.append(",".join(_fmt(x) for x in r))
        lines += [f"# {k}: {v}" for k, v in self.metadata]
        return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if x == 0.0:
        return "0"
    return format(x, ".17g")


def write_atomic(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", suffix=".csv", dir=d)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ----------------------------------------------------------------------------
# jobs

def _axis(cfg) -> np.ndarray:
    s = cfg.sweep
    return np.linspace(s["start"], s["stop"], s["count"])


def _model_builder(cfg):
    p = cfg.params
    nf = cfg.numerics["n_fock"]
    wc, weg = p["omega_c"], p["omega_eg"]
    m = cfg.model
    if m == "jcm":
        return lambda r: build_jcm(JcmParams(wc, weg, r * wc, nf))
    if m == "rabi":
        return lambda r: build_rabi(RabiParams(wc, weg, r * wc, nf, p["epsilon"]))
    if m == "polaron":
        return lambda r: build_polaron_rabi(RabiParams(wc, weg, r * wc, nf))
    if m == "grwa":
        return lambda r: grwa_project(build_polaron_rabi(RabiParams(wc, weg, r * wc, nf)))
    if m == "coulomb_tls":
        return lambda r: build_truncated_coulomb_tls(RabiParams(wc, weg, r * wc, nf))
    return lambda r: build_dicke(DickeParams(p["n_spins"], wc, weg, r * wc, nf, bosonized=True))


def _from_sweep(res: SweepResult, extra_meta=()) -> tuple[list[str], np.ndarray, list]:
    meta = [(k, str(v)) for k, v in sorted(res.metadata.items())]
    if res.failures:
        meta.append(("failures", "; ".join(f"#{i}: {m}" for i, m in res.failures)))
    return res.header(), res.rows(), meta + list(extra_meta)


def job_spectrum(cfg):
    k = cfg.numerics["k_levels"]
    res = spectrum_sweep(_model_builder(cfg), _axis(cfg), k, cfg.numerics["relative"], raise_on_failure=False)
    res.metadata["model"] = cfg.model
    if cfg.numerics["compare_jcm"] and cfg.model == "rabi":
        p = cfg.params
        wc, weg = p["omega_c"], p["omega_eg"]
        for i in range(k):
            res.columns[f"jcm_E{i}"] = np.array(
                [analytic_jcm_levels(JcmParams(wc, weg, r * wc, cfg.numerics["n_fock"]), k)[i] for r in res.axis])
        res.columns["rwa_boundary_energy"] = np.array(
            [wc * min(rwa_boundary(wc, weg, r * wc), 1e300) for r in res.axis])
    return _from_sweep(res)


def job_vacuum(cfg):
    p = cfg.params
    nf = cfg.numerics["n_fock"]
    wc, weg = p["omega_c"], p["omega_eg"]
    ax = _axis(cfg)
    c = perturbative_photon_coefficient(weg if weg > 0 else 1.0, wc) if weg > 0 else float("nan")
    photons, deg = [], []
    for r in ax:
        val, d = ground_state_photons(build_rabi(RabiParams(wc, weg, r * wc, nf)), 1, return_degeneracy=True)
        photons.append(val)
        deg.append(d)
    res = SweepResult("coupling", ax, {"photons": np.array(photons), "photons_leading_order": c * ax ** 2,
                                       "ground_degeneracy": np.array(deg, float)},
                      {"leading_coefficient": _fmt(c)})
    return _from_sweep(res)


def job_gauge(cfg):
    p, n = cfg.params, cfg.numerics
    pot = PotentialSpec.from_anharmonicity(p["A"], p["anharmonicity"], p["mass"])
    grid = pot.default_grid(n["n_points"])
    ax = _axis(cfg)
    cols = {}
    for name in ("full", "coulomb", "dipole"):
        for i in range(1, 5):
            cols[f"gap_{name}_{i}"] = np.full(len(ax), np.nan)
    iso = 0.0
    for j, r in enumerate(ax):
        g = resonant_gauge_params(r, pot, grid, n["n_fock"], n["n_matter_levels"])
        fam = build_gauge_family(g)
        ev = {k: eig_hermitian(v).values for k, v in fam.items()}
        iso = max(iso, float(np.max(np.abs(ev["full_coulomb"][:10] - ev["full_dipole"][:10]))))
        for name, key in (("full", "full_coulomb"), ("coulomb", "coulomb"), ("dipole", "dipole")):
            e = ev[key]
            for i in range(1, 5):
                cols[f"gap_{name}_{i}"][j] = e[i] - e[0]
    res = SweepResult("coupling", ax, cols, {"omega_c": "E1 - E0 of the bare double well",
                                            "max_full_gauge_mismatch": _fmt(iso)})
    return _from_sweep(res)


def job_steady(cfg):
    b, p = cfg.bath, cfg.params
    res = emission_sweep(_axis(cfg), tuple(b["kinds"].split(",")), cfg.numerics["n_fock"], p["omega_c"],
                         p["omega_eg"], b["gamma0"], b["T_a"], b["T_c"], b["spectrum"])
    return _from_sweep(res, [("T_a_units", "omega_eg")])


def job_gap(cfg):
    b, p = cfg.bath, cfg.params
    res = gap_sweep(_axis(cfg), b["kind"], cfg.numerics["n_fock"], p["omega_c"], p["omega_eg"], b["gamma0"],
                    b["T_a"] * p["omega_eg"], b["spectrum"])
    return _from_sweep(res)


CLASS_CODES = {"weak": 0, "strong": 1, "USC": 2, "deep-strong": 3}


def job_regime(cfg):
    rows = platform_metrics()
    header = ["row", "omega_c", "omega_eg", "omega_r", "zeta", "zeta_reference", "class_code"]
    data = np.array([[i, r["omega_c"], r["omega_eg"], r["omega_r"], r["zeta"], r["zeta_reference"],
                      CLASS_CODES[r["classification"]]] for i, r in enumerate(rows)], float)
    meta = [(f"row_{i}", r["system"]) for i, r in enumerate(rows)]
    meta += [("class_codes", ", ".join(f"{v}={k}" for k, v in CLASS_CODES.items())), ("discrepancy", MOLECULAR_ROW_NOTE)]
    return header, data, meta


def job_evolve(cfg):
    b, p = cfg.bath, cfg.params
    nf = cfg.numerics["n_fock"]
    H, baths, _ = rabi_open_system(p["coupling"], nf, p["omega_c"], p["omega_eg"], b["gamma0"],
                                   b["T_a"] * p["omega_eg"], b["T_c"], b["spectrum"])
    L = build_liouvillian(H, baths, b["kind"])
    s = H.space
    labels = {"excited": [1, 0], "ground": [0, 0], "photon": [0, 1]}[p["initial"]]
    v = np.zeros(s.total, complex)
    v[s.basis_index(labels)] = 1.0
    rho0 = np.outer(v, v.conj())
    ts = _axis(cfg)
    n_op = elementary_operators(s, 1, "number").data
    ee = (elementary_operators(s, 0, "sigma_z").data + np.eye(s.total)) / 2
    Ep = positive_frequency_part(baths[0].coupling, L.eigs)
    g = float(baths[0].rate(baths[0].frequency))
    rows = []
    for t, rho in zip(ts, lindblad_series(rho0, L, ts)):
        rows.append([t, rho.expect(n_op), rho.expect(ee), rho.trace().real, photodetection_rate(rho, Ep, g)])
    return ["t", "photons", "excited_population", "trace", "W_ph"], np.array(rows), [("kind", b["kind"])]


JOB_FUNCS = {"spectrum": job_spectrum, "vacuum": job_vacuum, "gauge": job_gauge, "steady": job_steady,
             "gap": job_gap, "regime": job_regime, "evolve": job_evolve}


def build_artifact(cfg: JobConfig) -> tuple[CsvArtifact, list]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        header, rows, meta = JOB_FUNCS[cfg.job](cfg)
    failures = [m for k, m in meta if k == "failures"]
    n = cfg.numerics
    metadata = [("version", __version__), ("job", cfg.job), ("config_hash", cfg.hash()),
                ("n_fock", str(n["n_fock"])),
                ("tolerances", "hermitian=1e-10 degeneracy=1e-8 residual=1e-8 zero_eig=1e-10 displacement_tail=1e-8")]
    metadata += meta
    return CsvArtifact(header, rows, metadata), failures


def output_path(cfg: JobConfig) -> str:
    base = os.environ.get(OUTPUT_DIR_ENV, ".")
    path = cfg.output or f"{cfg.job}.csv"
    return path if os.path.isabs(path) else os.path.join(base, path)


def run_job(cfg: JobConfig) -> CsvArtifact:
    """Run one job and write its CSV atomically; returns the artifact.

    Raises SolverError after writing when some sweep points failed.
    """
    art, failures = build_artifact(cfg)
    text = art.render()
    write_atomic(output_path(cfg), text)
    if failures:
        raise SolverError(f"sweep points failed: {failures[0]}")
    return art


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, ConvergenceError):
        return EXIT_CONVERGENCE
    if isinstance(exc, (CavityQEDError, np.linalg.LinAlgError)):
        return EXIT_SOLVER
    if isinstance(exc, OSError):
        return EXIT_IO
    raise exc


CATEGORY = {EXIT_CONFIG: "config", EXIT_CONVERGENCE: "convergence", EXIT_SOLVER: "solver", EXIT_IO: "io"}


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cavityqed", description="cavity QED model hierarchy: sweep results as CSV")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="job", required=True)
    for j in JOBS:
        sp = sub.add_parser(j)
        sp.add_argument("--config", help="YAML job file")
        sp.add_argument("--out", help="output CSV path")
        sp.add_argument("--n-fock", type=int, dest="n_fock", help="Fock truncation")
        sp.add_argument("--fast", action="store_true", help="reduced-accuracy preset")
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        text = ""
        if args.config:
            with open(args.config) as fh:
                text = fh.read()
        cfg = parse_config(text, job=args.job)
        cfg = apply_overrides(cfg, args.out, args.n_fock, args.fast)
        run_job(cfg)
    except BaseException as exc:   # noqa: BLE001 - mapped to exit codes
        if isinstance(exc, (KeyboardInterrupt, SystemExit)):
            raise
        code = exit_code(exc)
        print(f"error: category={CATEGORY[code]} message={exc}", file=sys.stderr)
        return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
