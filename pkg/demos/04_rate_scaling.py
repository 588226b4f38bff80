"""Iteration-cost scaling: Theta(d) for the Gaussian target, Theta(d^2)
for the heavy-tailed Student-t target.

Runs reduced-size versions of the reference sweeps (fewer seeds than the
acceptance suite, so a couple of minutes total) and fits the cost exponent
for both targets.  The full-size configs live in configs/.
"""

import numpy as np

from rwm_lab.harness import ExperimentConfig, fit_report, run_sweep


def run(name: str, doc: dict, out: str):
    cfg = ExperimentConfig.from_dict(doc)
    res = run_sweep(cfg, out_dir=out)
    cell = fit_report(res, cost_proxy="iact").cells[0]
    costs = [round(float(c), 1) for c in np.exp(cell.fit.log_cost)]
    print(f"{name}: fitted slope {cell.fit.slope:.3f} "
          f"(jackknife +/- {cell.fit.half_width:.3f})")
    print(f"  dims {list(map(int, cell.fit.dims))} -> median IACT {costs}")
    return cell.fit.slope


def main():
    light = {
        "experiment_id": "demo_light",
        "target": {"kind": "gaussian"},
        "increments": [{"family": "gaussian_iso", "l": 2.38, "gamma": 0.5}],
        "dims": [32, 64, 128, 256],
        "steps_rule": {"c": 150.0, "beta": 1.0, "min_steps": 30000},
        "seeds": {"count": 5, "master_seed": 99},
        "tracked_coords": 1,
        "diagnostics": ["iact_coord_bounded"],
    }
    heavy = {
        "experiment_id": "demo_heavy",
        "target": {"kind": "student_t", "nu": 3.0},
        "increments": [{"family": "gaussian_iso", "l": 2.38, "gamma": 0.5}],
        "dims": [16, 32, 64, 128],
        "steps_rule": {"c": 50.0, "beta": 2.0, "min_steps": 40000},
        "seeds": {"count": 8, "master_seed": 99},
        "tracked_coords": 1,
        "diagnostics": ["iact_z_bounded"],
    }
    print("cost proxy: integrated autocorrelation time of a bounded functional\n")
    s1 = run("Gaussian target (bounded first-coordinate functional)", light, "demo_out/light")
    s2 = run("Student-t(3) target (bounded radial functional)", heavy, "demo_out/heavy")
    print(f"\nlight-tail exponent ~ 1: got {s1:.2f}")
    print(f"heavy-tail exponent -> 2: got {s2:.2f} at these reduced dims "
          f"(the full config in configs/heavy_tail_reference.json reaches ~1.85)")


if __name__ == "__main__":
    main()
