#!/usr/bin/env python3
"""Emit every plot-ready CSV into a figures directory.

Generator kinds are computed fresh; the saturation-ratio tidy table is
derived from a completed saturate run when one is available (by default
runs/saturate-sweep, as written by run_all_configs.py).
"""

import argparse
import sys
from pathlib import Path

from hermlp.runner import emit_plot_data

FIGURES = [
    ("hermite-profile", {"k": 100}),
    ("rho-sigma", {"n": 2}),
    ("rho-sigma", {"n": 3}),
    ("bound-vs-r", {"n": 2, "lambda": 1000.0, "p": 2.0}),
    ("bound-vs-r", {"n": 2, "lambda": 1000.0, "p": 6.0}),
    ("bound-vs-mu", {"n": 2, "lambda": 1000.0, "r": 1.0, "p": 2.0}),
]


def main() -> int:
    repo = Path(__file__).resolve().parent.parent
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default=repo / "figures", type=Path)
    ap.add_argument("--saturate-run", default=repo / "runs" / "saturate-sweep",
                    type=Path, help="completed saturate run directory")
    args = ap.parse_args()

    for kind, params in FIGURES:
        tag = "-".join(f"{k}{v}" for k, v in sorted(params.items())
                       if k in ("n", "p"))
        name = f"{kind}-{tag}.csv" if tag else f"{kind}.csv"
        out = args.out_dir / name
        _, rows = emit_plot_data(kind, params=params, out_path=out)
        print(f"wrote {out} ({len(rows)} rows)")

    if (args.saturate_run / "results.csv").is_file():
        out = args.out_dir / "saturate-ratios.csv"
        _, rows = emit_plot_data("saturate-ratios", run_dir=args.saturate_run,
                                 out_path=out)
        print(f"wrote {out} ({len(rows)} rows)")
    else:
        print(f"no saturate run at {args.saturate_run}; skipped ratios table")
    return 0


if __name__ == "__main__":
    sys.exit(main())
