"""Configuration-driven experiment sweeps with reproducible persisted output.

A sweep config is a single JSON document with a strict schema (unknown keys
anywhere are rejected, and validation reports every violation at once).
Chains are the unit of parallelism; each chain's random stream is derived
from (master_seed, d, spec content hash, seed index), so editing the dims
or spec lists never perturbs other chains.

Outputs under the sweep directory:

* ``manifest.json``   config echo, config hash, code version, timestamp
* ``diagnostics.csv`` one row per (d, spec, seed, diagnostic); byte-stable
* ``chains.jsonl``    one summary object per chain (also for failed chains)
* ``trajectories/``   optional per-chain stride records (JSONL)

CSV schema (fixed): experiment_id, d, target_kind, nu, family, l, gamma,
seed, n_steps, diagnostic_name, value.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import __version__ as _code_version
from .diagnostics import (
    bounded_square,
    degeneracy_statistic,
    ergodic_error,
    esjd,
    fit_rate,
    iact,
    threshold_crossing_m,
    z_oscillation,
    RateFit,
)
from .errors import ConfigError
from .increments import Family, IncrementSpec
from .kernel import Trajectory, run_chain
from .seeding import sweep_chain_seed
from .targets import TargetSpec, marginal_expectation, standard_gaussian, student_t

CSV_COLUMNS = (
    "experiment_id",
    "d",
    "target_kind",
    "nu",
    "family",
    "l",
    "gamma",
    "seed",
    "n_steps",
    "diagnostic_name",
    "value",
)

THRESHOLD_EPS = 0.2  # pre-registered epsilon for the threshold-crossing proxy
FAILURE_DIAGNOSTIC = "chain_failed"


# ---------------------------------------------------------------------------
# Spec <-> primitive dict conversion (manifest, hashing, worker transport)
# ---------------------------------------------------------------------------


def target_to_dict(spec: TargetSpec) -> dict:
    if spec.nu is not None:
        return {"kind": "student_t", "nu": spec.nu}
    return {"kind": "gaussian"}


def validate_target_dict(d: dict) -> None:
    raise_unknown_keys("target", d, {"kind", "nu"})
    kind = d.get("kind")
    if kind == "gaussian":
        if "nu" in d:
            raise ConfigError(["target.nu is only valid for student_t targets"])
    elif kind == "student_t":
        if "nu" not in d:
            raise ConfigError(["target.nu is required for student_t targets"])
        nu = d["nu"]
        if not isinstance(nu, (int, float)) or not nu > 0:
            raise ConfigError([f"target.nu must be a positive number, got {nu!r}"])
    else:
        raise ConfigError([f"target.kind must be 'gaussian' or 'student_t', got {kind!r}"])


def build_target(d: dict, dim: int) -> TargetSpec:
    if d["kind"] == "gaussian":
        return standard_gaussian(dim)
    return student_t(dim, float(d["nu"]))


def increment_to_dict(spec: IncrementSpec) -> dict:
    out = {"family": spec.family.value, "l": spec.l, "gamma": spec.gamma}
    for k in ("df", "alpha", "p_move"):
        v = getattr(spec, k)
        if v is not None:
            out[k] = v
    return out


def increment_from_dict(d: dict) -> IncrementSpec:
    raise_unknown_keys("increment", d, {"family", "l", "gamma", "df", "alpha", "p_move"})
    try:
        fam = Family(d.get("family"))
    except ValueError:
        valid = ", ".join(f.value for f in Family)
        raise ConfigError([f"increment.family must be one of {{{valid}}}, got {d.get('family')!r}"])
    kwargs = {k: float(d[k]) for k in ("df", "alpha", "p_move") if k in d}
    return IncrementSpec(fam, float(d.get("l", 0.0)), float(d.get("gamma", 0.5)), **kwargs)


def spec_content_id(target_dict: dict, increment_dict: dict) -> str:
    payload = json.dumps(
        {"target": target_dict, "increment": increment_dict},
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def raise_unknown_keys(where: str, d: dict, allowed: set) -> None:
    unknown = sorted(set(d) - allowed)
    if unknown:
        raise ConfigError([f"{where}: unknown key(s) {unknown}; allowed: {sorted(allowed)}"])


# ---------------------------------------------------------------------------
# Diagnostics registry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiagnosticDef:
    name: str
    compute: Callable[[Trajectory, dict], float]
    min_steps: Callable[[int], int] = lambda d: 1
    checkpoints: Callable[[int], tuple] = lambda d: ()
    needs_stride1: bool = False
    needs_tracked: bool = False


def _coord_reference(traj: Trajectory) -> float:
    return marginal_expectation(traj.target, bounded_square, k=1)


def _diag_accept_rate(traj, ctx):
    return traj.accept_rate


def _diag_esjd(traj, ctx):
    return esjd(traj)


def _diag_iact_coord(traj, ctx):
    return iact(bounded_square(traj.tracked_series(0)))


def _diag_iact_z(traj, ctx):
    return iact(np.minimum(traj.z_series, 10.0))


def _diag_ergodic_error(traj, ctx):
    return ergodic_error(traj, bounded_square, [0], ctx["coord_reference"])


def _diag_threshold_m(traj, ctx):
    m, _censored = threshold_crossing_m(
        bounded_square(traj.tracked_series(0)), ctx["coord_reference"], THRESHOLD_EPS
    )
    return m


def _diag_degeneracy_sqrt_d(traj, ctx):
    return degeneracy_statistic(traj, math.isqrt(traj.dim - 1) + 1)


def _diag_degeneracy_4d(traj, ctx):
    return degeneracy_statistic(traj, 4 * traj.dim)


def _diag_z_osc_d15(traj, ctx):
    return z_oscillation(traj, 1.0, round(traj.dim**1.5))


def _diag_z_osc_5d2(traj, ctx):
    return z_oscillation(traj, 1.0, 5 * traj.dim * traj.dim)


DIAGNOSTICS: dict[str, DiagnosticDef] = {
    d.name: d
    for d in [
        DiagnosticDef("accept_rate", _diag_accept_rate),
        DiagnosticDef("esjd", _diag_esjd),
        DiagnosticDef(
            "iact_coord_bounded",
            _diag_iact_coord,
            min_steps=lambda d: 1000,
            needs_stride1=True,
            needs_tracked=True,
        ),
        DiagnosticDef("iact_z_bounded", _diag_iact_z, min_steps=lambda d: 1000),
        DiagnosticDef(
            "ergodic_error_coord",
            _diag_ergodic_error,
            needs_stride1=True,
            needs_tracked=True,
        ),
        DiagnosticDef(
            "threshold_m_coord",
            _diag_threshold_m,
            needs_stride1=True,
            needs_tracked=True,
        ),
        DiagnosticDef(
            "degeneracy_sqrt_d",
            _diag_degeneracy_sqrt_d,
            min_steps=lambda d: math.isqrt(d - 1) + 1,
            checkpoints=lambda d: (math.isqrt(d - 1) + 1,),
        ),
        DiagnosticDef(
            "degeneracy_4d",
            _diag_degeneracy_4d,
            min_steps=lambda d: 4 * d,
            checkpoints=lambda d: (4 * d,),
        ),
        DiagnosticDef(
            "z_oscillation_d15",
            _diag_z_osc_d15,
            min_steps=lambda d: round(d**1.5),
        ),
        DiagnosticDef(
            "z_oscillation_5d2",
            _diag_z_osc_5d2,
            min_steps=lambda d: 5 * d * d,
        ),
    ]
}


# ---------------------------------------------------------------------------
# Experiment configuration
# ---------------------------------------------------------------------------

_TOP_KEYS = {
    "experiment_id",
    "target",
    "increments",
    "dims",
    "steps_rule",
    "seeds",
    "tracked_coords",
    "record_stride",
    "diagnostics",
    "output",
    "workers",
    "save_trajectories",
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated sweep description; construct with ``ExperimentConfig.from_dict``."""

    experiment_id: str
    target: dict
    increments: tuple
    dims: tuple
    steps_c: float
    steps_beta: float
    steps_min: int
    seed_count: int
    master_seed: int
    tracked_coords: int
    record_stride: int
    diagnostics: tuple
    output: Optional[str]
    workers: int
    save_trajectories: bool
    raw: dict = field(repr=False)

    def steps_for(self, d: int) -> int:
        return max(self.steps_min, int(round(self.steps_c * float(d) ** self.steps_beta)))

    def config_hash(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    @staticmethod
    def from_dict(doc: dict) -> "ExperimentConfig":
        errors: list[str] = []
        if not isinstance(doc, dict):
            raise ConfigError(["config root must be a JSON object"])
        unknown = sorted(set(doc) - _TOP_KEYS)
        if unknown:
            errors.append(f"unknown top-level key(s) {unknown}; allowed: {sorted(_TOP_KEYS)}")

        experiment_id = doc.get("experiment_id")
        if not isinstance(experiment_id, str) or not experiment_id:
            errors.append("experiment_id: required nonempty string")

        target = doc.get("target")
        if not isinstance(target, dict):
            errors.append("target: required object with keys kind (and nu for student_t)")
            target = {"kind": "gaussian"}
        else:
            try:
                validate_target_dict(target)
            except ConfigError as e:
                errors.extend(e.errors)

        increments = doc.get("increments")
        inc_specs: list[IncrementSpec] = []
        if not isinstance(increments, list) or not increments:
            errors.append("increments: required nonempty list of increment objects")
        else:
            for i, inc in enumerate(increments):
                if not isinstance(inc, dict):
                    errors.append(f"increments[{i}]: must be an object")
                    continue
                try:
                    inc_specs.append(increment_from_dict(inc))
                except ConfigError as e:
                    errors.extend(f"increments[{i}]: {msg}" for msg in e.errors)

        dims = doc.get("dims")
        if (
            not isinstance(dims, list)
            or not dims
            or not all(isinstance(d, int) and d >= 1 for d in dims)
        ):
            errors.append("dims: required nonempty list of positive integers")
            dims = []
        elif any(b <= a for a, b in zip(dims, dims[1:])):
            errors.append(f"dims must be strictly increasing, got {dims}")

        steps_rule = doc.get("steps_rule")
        steps_c, steps_beta, steps_min = 1.0, 1.0, 1
        if not isinstance(steps_rule, dict):
            errors.append("steps_rule: required object {c, beta[, min_steps]}")
        else:
            extra = sorted(set(steps_rule) - {"c", "beta", "min_steps"})
            if extra:
                errors.append(f"steps_rule: unknown key(s) {extra}")
            try:
                steps_c = float(steps_rule["c"])
                steps_beta = float(steps_rule["beta"])
            except (KeyError, TypeError, ValueError):
                errors.append("steps_rule: c and beta must be numbers")
            steps_min = steps_rule.get("min_steps", 1)
            if not isinstance(steps_min, int) or steps_min < 1:
                errors.append(f"steps_rule.min_steps must be a positive integer, got {steps_min}")
                steps_min = 1
            for d in dims:
                if int(round(steps_c * float(d) ** steps_beta)) < 1:
                    errors.append(f"steps_rule: c*d^beta evaluates below 1 at d={d}")

        seeds = doc.get("seeds")
        seed_count, master_seed = 1, 0
        if not isinstance(seeds, dict):
            errors.append("seeds: required object {count, master_seed}")
        else:
            extra = sorted(set(seeds) - {"count", "master_seed"})
            if extra:
                errors.append(f"seeds: unknown key(s) {extra}")
            seed_count = seeds.get("count", 0)
            master_seed = seeds.get("master_seed", 0)
            if not isinstance(seed_count, int) or seed_count < 1:
                errors.append(f"seeds.count must be an integer >= 1, got {seed_count}")
                seed_count = 1
            if not isinstance(master_seed, int):
                errors.append(f"seeds.master_seed must be an integer, got {master_seed}")
                master_seed = 0

        tracked = doc.get("tracked_coords", 1)
        if not isinstance(tracked, int) or tracked < 0:
            errors.append(f"tracked_coords must be a nonnegative integer, got {tracked}")
            tracked = 1
        if dims and tracked > min(dims):
            errors.append(
                f"tracked_coords={tracked} exceeds the smallest dimension {min(dims)}"
            )

        stride = doc.get("record_stride", 1)
        if not isinstance(stride, int) or stride < 1:
            errors.append(f"record_stride must be a positive integer, got {stride}")
            stride = 1

        diagnostics = doc.get("diagnostics")
        if not isinstance(diagnostics, list) or not diagnostics:
            errors.append("diagnostics: required nonempty list of diagnostic names")
            diagnostics = []
        for name in diagnostics:
            if name not in DIAGNOSTICS:
                errors.append(
                    f"diagnostics: unknown name {name!r}; valid: {sorted(DIAGNOSTICS)}"
                )

        output = doc.get("output")
        if output is not None and not isinstance(output, str):
            errors.append("output: must be a string path")
        workers = doc.get("workers", 1)
        if not isinstance(workers, int) or workers < 1:
            errors.append(f"workers must be a positive integer, got {workers}")
            workers = 1
        save_traj = doc.get("save_trajectories", False)
        if not isinstance(save_traj, bool):
            errors.append("save_trajectories: must be a boolean")
            save_traj = False

        # Cross-field requirements of the requested diagnostics.
        known = [n for n in diagnostics if n in DIAGNOSTICS]
        for name in known:
            dd = DIAGNOSTICS[name]
            if dd.needs_stride1 and stride != 1:
                errors.append(f"diagnostic {name} requires record_stride = 1")
            if dd.needs_tracked and tracked < 1:
                errors.append(f"diagnostic {name} requires tracked_coords >= 1")
            for d in dims:
                need = dd.min_steps(d)
                have = max(steps_min, int(round(steps_c * float(d) ** steps_beta)))
                if have < need:
                    errors.append(
                        f"diagnostic {name} needs >= {need} steps at d={d}, steps_rule gives {have}"
                    )

        if errors:
            raise ConfigError(errors)

        return ExperimentConfig(
            experiment_id=experiment_id,
            target=dict(target),
            increments=tuple(increment_to_dict(s) for s in inc_specs),
            dims=tuple(dims),
            steps_c=steps_c,
            steps_beta=steps_beta,
            steps_min=steps_min,
            seed_count=seed_count,
            master_seed=master_seed,
            tracked_coords=tracked,
            record_stride=stride,
            diagnostics=tuple(diagnostics),
            output=output,
            workers=workers,
            save_trajectories=save_traj,
            raw=doc,
        )

    @staticmethod
    def from_file(path) -> "ExperimentConfig":
        with open(path) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as e:
                raise ConfigError([f"config is not valid JSON: {e}"])
        return ExperimentConfig.from_dict(doc)


def resolve_workers(cfg: ExperimentConfig, cli_workers: Optional[int] = None) -> int:
    """Worker-count precedence: RWM_LAB_THREADS env, then CLI, then config."""
    env = os.environ.get("RWM_LAB_THREADS")
    if env:
        try:
            n = int(env)
            if n >= 1:
                return n
        except ValueError:
            pass
    if cli_workers is not None:
        return max(1, cli_workers)
    return cfg.workers


# ---------------------------------------------------------------------------
# Sweep execution
# ---------------------------------------------------------------------------


def _run_task(task: dict) -> dict:
    """Run one chain and compute its diagnostics; never raises.

    Module-level so process pools can pickle it; failures are contained in
    the returned record.
    """
    try:
        target = build_target(task["target"], task["d"])
        inc = increment_from_dict(task["increment"])
        checkpoints = set()
        for name in task["diagnostics"]:
            checkpoints.update(DIAGNOSTICS[name].checkpoints(task["d"]))
        traj = run_chain(
            target,
            inc,
            n_steps=task["n_steps"],
            record_stride=task["record_stride"],
            tracked_coord_ids=range(task["tracked_coords"]),
            seed=task["chain_seed"],
            coord_range_checkpoints=sorted(checkpoints),
        )
        ctx: dict = {}
        if any(n in ("ergodic_error_coord", "threshold_m_coord") for n in task["diagnostics"]):
            ctx["coord_reference"] = marginal_expectation(target, bounded_square, k=1)
        values = {name: float(DIAGNOSTICS[name].compute(traj, ctx)) for name in task["diagnostics"]}
        summary = dict(traj.summary())
        summary.update(
            experiment_id=task["experiment_id"],
            seed=task["seed_index"],
            chain_seed=task["chain_seed"],
            status="ok",
        )
        if task.get("trajectory_path"):
            path = Path(task["trajectory_path"])
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w") as fh:
                for line in traj.records_jsonl():
                    fh.write(line + "\n")
        return {"task": task, "values": values, "summary": summary, "error": None}
    except Exception as exc:  # noqa: BLE001 - crash containment is the contract
        summary = {
            "experiment_id": task["experiment_id"],
            "d": task["d"],
            "seed": task["seed_index"],
            "chain_seed": task["chain_seed"],
            "status": "failed",
            "error": f"{type(exc).__name__}: {exc}",
        }
        return {"task": task, "values": None, "summary": summary, "error": summary["error"]}


@dataclass
class SweepResult:
    manifest: dict
    rows: list
    summaries: list
    out_dir: Path
    csv_path: Path
    jsonl_path: Path
    n_failed: int


def _format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def run_sweep(
    cfg: ExperimentConfig,
    out_dir: Optional[str] = None,
    workers: Optional[int] = None,
) -> SweepResult:
    """Execute every (d, increment, seed) chain and persist the results.

    Rerunning the same config with the same master seed reproduces the
    CSV and JSONL files byte for byte (row order is sorted, float
    formatting is shortest round-trip repr).
    """
    out = Path(out_dir or cfg.output or f"sweep_{cfg.experiment_id}")
    out.mkdir(parents=True, exist_ok=True)
    n_workers = resolve_workers(cfg, workers)

    tasks = []
    for d in cfg.dims:
        n_steps = cfg.steps_for(d)
        for inc_dict in cfg.increments:
            sid = spec_content_id(cfg.target, inc_dict)
            for seed_index in range(cfg.seed_count):
                task = {
                    "experiment_id": cfg.experiment_id,
                    "target": cfg.target,
                    "increment": inc_dict,
                    "d": d,
                    "seed_index": seed_index,
                    "chain_seed": sweep_chain_seed(cfg.master_seed, d, sid, seed_index),
                    "n_steps": n_steps,
                    "record_stride": cfg.record_stride,
                    "tracked_coords": cfg.tracked_coords,
                    "diagnostics": list(cfg.diagnostics),
                    "spec_id": sid,
                }
                if cfg.save_trajectories:
                    task["trajectory_path"] = str(
                        out / "trajectories" / f"d{d}_{sid}_s{seed_index}.jsonl"
                    )
                tasks.append(task)

    if n_workers == 1:
        outcomes = [_run_task(t) for t in tasks]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=n_workers) as pool:
            outcomes = list(pool.map(_run_task, tasks))

    rows = []
    summaries = []
    n_failed = 0
    for oc in outcomes:
        task = oc["task"]
        inc = task["increment"]
        base = {
            "experiment_id": task["experiment_id"],
            "d": task["d"],
            "target_kind": task["target"]["kind"],
            "nu": task["target"].get("nu"),
            "family": inc["family"],
            "l": inc["l"],
            "gamma": inc.get("gamma", 0.5),
            "seed": task["seed_index"],
            "n_steps": task["n_steps"],
        }
        if oc["error"] is None:
            for name, value in oc["values"].items():
                rows.append({**base, "diagnostic_name": name, "value": value})
        else:
            n_failed += 1
            rows.append({**base, "diagnostic_name": FAILURE_DIAGNOSTIC, "value": math.nan})
        summaries.append(oc["summary"])

    sort_key = lambda r: (
        r["d"],
        r["family"],
        r["l"],
        r["gamma"],
        r["seed"],
        r["diagnostic_name"],
    )
    rows.sort(key=sort_key)
    summaries.sort(key=lambda s: (s.get("d", 0), s.get("seed", 0), str(s.get("family", ""))))

    csv_path = out / "diagnostics.csv"
    with open(csv_path, "w", newline="") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for r in rows:
            fh.write(",".join(_format_value(r[c]) for c in CSV_COLUMNS) + "\n")

    jsonl_path = out / "chains.jsonl"
    with open(jsonl_path, "w") as fh:
        for s in summaries:
            fh.write(json.dumps(s, sort_keys=True) + "\n")

    manifest = {
        "experiment_id": cfg.experiment_id,
        "config_hash": cfg.config_hash(),
        "code_version": _code_version,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "n_chains": len(tasks),
        "n_failed": n_failed,
        "config": cfg.raw,
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")

    return SweepResult(
        manifest=manifest,
        rows=rows,
        summaries=summaries,
        out_dir=out,
        csv_path=csv_path,
        jsonl_path=jsonl_path,
        n_failed=n_failed,
    )


# ---------------------------------------------------------------------------
# Rate-exponent reports over finished sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CellFit:
    target_kind: str
    nu: Optional[float]
    family: str
    l: float
    gamma: float
    proxy: str
    diagnostic: str
    fit: RateFit

    def label(self) -> str:
        nu = "" if self.nu is None else f", nu={self.nu:g}"
        return f"{self.target_kind}{nu} | {self.family} l={self.l:g} gamma={self.gamma:g}"


@dataclass
class FitReport:
    proxy: str
    cells: list

    def to_text_table(self) -> str:
        lines = [
            f"{'cell':56s} {'slope':>8s} {'+/-':>8s} {'resid':>8s} {'seeds':>6s}",
        ]
        for c in self.cells:
            hw = "n/a" if math.isnan(c.fit.half_width) else f"{c.fit.half_width:.3f}"
            lines.append(
                f"{c.label():56s} {c.fit.slope:8.3f} {hw:>8s} "
                f"{c.fit.residual_max:8.3f} {c.fit.n_seeds:6d}"
            )
        return "\n".join(lines)

    def to_csv(self) -> str:
        out = ["target_kind,nu,family,l,gamma,proxy,diagnostic,slope,half_width,residual_max,n_seeds"]
        for c in self.cells:
            out.append(
                ",".join(
                    _format_value(v)
                    for v in (
                        c.target_kind,
                        c.nu,
                        c.family,
                        c.l,
                        c.gamma,
                        c.proxy,
                        c.diagnostic,
                        c.fit.slope,
                        c.fit.half_width,
                        c.fit.residual_max,
                        c.fit.n_seeds,
                    )
                )
            )
        return "\n".join(out) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "proxy": self.proxy,
            "cells": [
                {
                    "target_kind": c.target_kind,
                    "nu": c.nu,
                    "family": c.family,
                    "l": c.l,
                    "gamma": c.gamma,
                    "proxy": c.proxy,
                    "diagnostic": c.diagnostic,
                    "slope": c.fit.slope,
                    "intercept": c.fit.intercept,
                    "half_width": None if math.isnan(c.fit.half_width) else c.fit.half_width,
                    "residual_max": c.fit.residual_max,
                    "n_seeds": c.fit.n_seeds,
                    "points": [
                        [float(d), float(math.exp(lc))]
                        for d, lc in zip(c.fit.dims, c.fit.log_cost)
                    ],
                }
                for c in self.cells
            ],
        }


def _read_csv_rows(csv_path) -> list:
    rows = []
    with open(csv_path) as fh:
        header = fh.readline().rstrip("\n").split(",")
        if header != list(CSV_COLUMNS):
            raise ValueError(f"unexpected CSV schema {header}, wanted {list(CSV_COLUMNS)}")
        for line in fh:
            parts = line.rstrip("\n").split(",")
            row = dict(zip(CSV_COLUMNS, parts))
            row["d"] = int(row["d"])
            row["nu"] = float(row["nu"]) if row["nu"] else None
            row["l"] = float(row["l"])
            row["gamma"] = float(row["gamma"])
            row["seed"] = int(row["seed"])
            row["value"] = float(row["value"]) if row["value"] else math.nan
            rows.append(row)
    return rows


def proxy_diagnostic_name(proxy: str, target_kind: str) -> str:
    if proxy == "iact":
        return "iact_z_bounded" if target_kind == "student_t" else "iact_coord_bounded"
    if proxy == "threshold":
        return "threshold_m_coord"
    raise ValueError(f"unknown cost proxy {proxy!r} (use 'iact' or 'threshold')")


def fit_report(source, cost_proxy: str = "iact") -> FitReport:
    """Fit the cost exponent per (target, family, gamma) cell of a sweep.

    ``source`` is a SweepResult or a sweep output directory.  The cost per
    (d, seed) is the chosen proxy diagnostic; per-d costs enter the fit as
    medians over seeds with a jackknife half-width.
    """
    if isinstance(source, SweepResult):
        rows = source.rows
    else:
        rows = _read_csv_rows(Path(source) / "diagnostics.csv")

    cells: dict[tuple, dict] = {}
    for r in rows:
        key = (r["target_kind"], r["nu"], r["family"], r["l"], r["gamma"])
        cells.setdefault(key, {})
        want = proxy_diagnostic_name(cost_proxy, r["target_kind"])
        if r["diagnostic_name"] != want:
            continue
        cells[key].setdefault(r["d"], {})[r["seed"]] = r["value"]

    fits = []
    for key in sorted(cells, key=str):
        target_kind, nu, family, l, gamma = key
        per_d = cells[key]
        diag = proxy_diagnostic_name(cost_proxy, target_kind)
        if not per_d:
            raise ValueError(
                f"sweep has no {diag!r} rows for cell {key}; "
                "was the diagnostic requested in the config?"
            )
        points = []
        for d in sorted(per_d):
            by_seed = per_d[d]
            vals = np.array([by_seed[s] for s in sorted(by_seed)])
            finite = vals[np.isfinite(vals)]
            if finite.size == 0:
                raise ValueError(f"cell {key}: no finite {diag} values at d={d}")
            points.append((d, finite))
        fits.append(
            CellFit(
                target_kind=target_kind,
                nu=nu,
                family=family,
                l=l,
                gamma=gamma,
                proxy=cost_proxy,
                diagnostic=diag,
                fit=fit_rate(points),
            )
        )
    return FitReport(proxy=cost_proxy, cells=fits)
