#!/usr/bin/env python3
"""Figure renderer for sweep diagnostics CSVs and fit-report JSONs.

A strictly downstream consumer of the experiment harness's file formats:
it reads the diagnostics CSV (schema validated before any rendering) and,
for rate figures, the fit-report JSON produced by ``rwm-lab fit --json``.
Slope annotations always come from the fit report; this layer never fits
anything itself and aggregates lines by medians only.

Usage:
    plots/render.py --kind rate_lines --in sweep/diagnostics.csv \
        --fit fits.json --out rates.png

Kinds: rate_lines, degeneracy_decay, z_oscillation, acceptance_curve.
Exit codes: 0 success, 1 invalid input (schema mismatch, malformed CSV,
missing fit report), 2 unexpected failure.  Output files are written
atomically: a failed render leaves no partial file behind.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import tempfile
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

EXPECTED_COLUMNS = [
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
]

KINDS = ("rate_lines", "degeneracy_decay", "z_oscillation", "acceptance_curve")

# Fixed style so identical inputs produce identical bytes.
STYLE = {
    "figure.figsize": (7.0, 5.0),
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.family": "DejaVu Sans",
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
}

MARKERS = ["o", "s", "^", "D", "v", "P", "X", "*"]


class InputError(ValueError):
    """Invalid or malformed input files."""


@dataclass(frozen=True)
class PlotJob:
    """One figure request: what to draw, from which files, to where."""

    kind: str
    csv_path: str
    out_path: str
    fit_path: str | None = None


def read_rows(csv_path: str) -> list[dict]:
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError("CSV is empty: no header row")
        missing = [c for c in EXPECTED_COLUMNS if c not in header]
        if missing:
            raise InputError(
                f"CSV schema mismatch: missing column(s) {missing}; expected {EXPECTED_COLUMNS}"
            )
        idx = {c: header.index(c) for c in EXPECTED_COLUMNS}
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(header):
                raise InputError(f"CSV line {lineno}: expected {len(header)} fields, got {len(rec)}")
            try:
                rows.append(
                    {
                        "d": int(rec[idx["d"]]),
                        "target_kind": rec[idx["target_kind"]],
                        "nu": float(rec[idx["nu"]]) if rec[idx["nu"]] else None,
                        "family": rec[idx["family"]],
                        "l": float(rec[idx["l"]]),
                        "gamma": float(rec[idx["gamma"]]),
                        "seed": int(rec[idx["seed"]]),
                        "diagnostic_name": rec[idx["diagnostic_name"]],
                        "value": float(rec[idx["value"]]) if rec[idx["value"]] else math.nan,
                    }
                )
            except ValueError as e:
                raise InputError(f"CSV line {lineno}: {e}")
    return rows


def median(values: list[float]) -> float:
    finite = sorted(v for v in values if not math.isnan(v))
    if not finite:
        return math.nan
    n = len(finite)
    mid = n // 2
    return finite[mid] if n % 2 else 0.5 * (finite[mid - 1] + finite[mid])


def group_medians(rows: list[dict], diagnostics: set) -> dict:
    """{(family, gamma, diagnostic): sorted [(d, median value)]}"""
    per = defaultdict(lambda: defaultdict(list))
    for r in rows:
        if r["diagnostic_name"] in diagnostics:
            per[(r["family"], r["gamma"], r["diagnostic_name"])][r["d"]].append(r["value"])
    return {
        key: sorted((d, median(vals)) for d, vals in by_d.items())
        for key, by_d in per.items()
    }


def load_fit_cells(fit_path: str) -> list[dict]:
    try:
        with open(fit_path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise InputError(f"fit report is not valid JSON: {e}")
    if "cells" not in doc:
        raise InputError("fit report JSON has no 'cells' entry")
    return doc["cells"]


def _empty_axes(ax, message: str):
    ax.text(0.5, 0.5, message, ha="center", va="center", transform=ax.transAxes,
            fontsize=12, color="crimson")
    ax.set_xticks([])
    ax.set_yticks([])


def draw_rate_lines(ax, rows, fit_cells):
    if fit_cells is None:
        raise InputError("rate_lines requires --fit (slopes are never re-fit here)")
    diagnostics = {c["diagnostic"] for c in fit_cells}
    groups = group_medians(rows, diagnostics)
    if not groups:
        _empty_axes(ax, "no matching diagnostic rows (warning: empty plot)")
        return
    for i, (key, pts) in enumerate(sorted(groups.items(), key=str)):
        family, gamma, diag = key
        cell = next(
            (c for c in fit_cells if c["family"] == family and c["gamma"] == gamma
             and c["diagnostic"] == diag),
            None,
        )
        slope_txt = f", slope {cell['slope']:.2f}" if cell else ""
        ds = [p[0] for p in pts]
        vs = [p[1] for p in pts]
        ax.loglog(ds, vs, marker=MARKERS[i % len(MARKERS)],
                  label=f"{family} gamma={gamma:g}{slope_txt}")
    ax.set_xlabel("dimension d")
    ax.set_ylabel("median cost (iterations)")
    ax.set_title("iteration cost vs dimension")
    ax.legend(fontsize=8)


def draw_decay(ax, rows, diagnostics, title, ylabel):
    groups = group_medians(rows, diagnostics)
    if not groups:
        _empty_axes(ax, "no matching diagnostic rows (warning: empty plot)")
        return
    for i, (key, pts) in enumerate(sorted(groups.items(), key=str)):
        family, gamma, diag = key
        ax.loglog([p[0] for p in pts], [p[1] for p in pts],
                  marker=MARKERS[i % len(MARKERS)], label=f"{diag} ({family} gamma={gamma:g})")
    ax.set_xlabel("dimension d")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(fontsize=8)


def draw_acceptance(ax, rows):
    groups = group_medians(rows, {"accept_rate"})
    if not groups:
        _empty_axes(ax, "no accept_rate rows (warning: empty plot)")
        return
    for i, (key, pts) in enumerate(sorted(groups.items(), key=str)):
        family, gamma, _ = key
        ax.semilogx([p[0] for p in pts], [p[1] for p in pts],
                    marker=MARKERS[i % len(MARKERS)], label=f"{family} gamma={gamma:g}")
    ax.axhline(0.234, color="gray", lw=0.8, ls="--")
    ax.set_xlabel("dimension d")
    ax.set_ylabel("median acceptance rate")
    ax.set_ylim(0, 1)
    ax.set_title("acceptance rate vs dimension")
    ax.legend(fontsize=8)


def render(job: PlotJob) -> None:
    """Render one figure; atomic write, no partial file on failure."""
    kind, csv_path, out_path, fit_path = job.kind, job.csv_path, job.out_path, job.fit_path
    if kind not in KINDS:
        raise InputError(f"unknown figure kind {kind!r}; valid: {KINDS}")
    rows = read_rows(csv_path)
    fit_cells = load_fit_cells(fit_path) if fit_path else None

    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        try:
            if not rows:
                _empty_axes(ax, "empty sweep CSV (warning: nothing to plot)")
            elif kind == "rate_lines":
                draw_rate_lines(ax, rows, fit_cells)
            elif kind == "degeneracy_decay":
                draw_decay(ax, rows, {"degeneracy_sqrt_d", "degeneracy_4d"},
                           "coordinate degeneracy vs dimension", "median min-coordinate range")
            elif kind == "z_oscillation":
                draw_decay(ax, rows, {"z_oscillation_d15", "z_oscillation_5d2"},
                           "squared-radius oscillation vs dimension", "median Z oscillation")
            elif kind == "acceptance_curve":
                draw_acceptance(ax, rows)
            fig.tight_layout()
            out = Path(out_path)
            out.parent.mkdir(parents=True, exist_ok=True)
            tmp_fd, tmp_name = tempfile.mkstemp(dir=out.parent, suffix=out.suffix)
            os.close(tmp_fd)
            try:
                # Strip the mtime-independent but version-bearing metadata so
                # rerenders are byte-identical.
                fig.savefig(tmp_name, format=out.suffix.lstrip(".") or "png",
                            metadata={"Software": None})
                os.replace(tmp_name, out)
            except BaseException:
                if os.path.exists(tmp_name):
                    os.unlink(tmp_name)
                raise
        finally:
            plt.close(fig)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Render sweep figures from diagnostics CSVs.")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--in", dest="csv_path", required=True, help="diagnostics CSV path")
    parser.add_argument("--fit", dest="fit_path", default=None, help="fit report JSON path")
    parser.add_argument("--out", dest="out_path", required=True, help="output figure path")
    args = parser.parse_args(argv)
    try:
        render(PlotJob(args.kind, args.csv_path, args.out_path, args.fit_path))
    except (InputError, OSError) as e:
        print(f"render failed: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # noqa: BLE001
        print(f"unexpected failure: {e}", file=sys.stderr)
        return 2
    print(f"wrote {args.out_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
