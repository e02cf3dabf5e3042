"""Regenerate the data behind the linear-vs-simulation and topology
comparison plots as CSV, then print a short digest.

    python scripts/run_figures.py [outdir]
"""

import csv
import sys
from pathlib import Path

from glauber_retention.cli import main

HERE = Path(__file__).parent


def digest(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    print(f"{path}: {len(rows)} rows")
    for r in rows[:: max(1, len(rows) // 8)]:
        print("  ", r["topology"], r["method"], f"beta_s={float(r['beta_s']):.3g}",
              f"beta_h={r['beta_h']}", f"tau/n={r['tau_events_per_dipole']}",
              f"se={r['std_error'] or '-'}")


if __name__ == "__main__":
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "results")
    out.mkdir(parents=True, exist_ok=True)
    for name in ("fig4", "fig5"):
        target = out / f"{name}.csv"
        code = main(["-v", "sweep", str(HERE / f"{name}.sweep"), str(target)])
        if code:
            sys.exit(code)
        digest(target)
