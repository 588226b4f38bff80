"""Run the analytic identity battery and print the report as a table."""

import rwm_lab as rl


def main():
    report = rl.verify_analytics("default")
    width = max(len(c.name) for c in report.checks)
    for c in report.checks:
        bound = "structural" if c.bound is None else f"<= {c.bound:.3e}"
        print(f"[{'PASS' if c.passed else 'FAIL'}] {c.name:<{width}s}  {c.value:.6e}  {bound}")
    print(f"\n{len(report.checks)} checks, all passed: {report.all_passed}")


if __name__ == "__main__":
    main()
