"""Product-term recovery on the first synthetic benchmark.

Three independent U[0, 100] inputs, y = 120 + 80 * x1 * x3 with no noise.
The pipeline should come back with exactly the x1*x3 term, coefficients
(120, 80), and a perfect adjusted R^2, while the raw-column baseline is
stuck well below it.

Usage:
    python3 scripts/run_example1.py [--n 1000] [--seed 0] [--out-dir runs/example1]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from parseal import SelectionConfig, run_pipeline, synth_example1


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", default="runs/example1")
    args = parser.parse_args()

    dataset = synth_example1(args.n, seed=args.seed)
    cfg = SelectionConfig(varsigma=0.5)
    report = run_pipeline(dataset, cfg, with_baseline=True, out_dir=args.out_dir)

    model = report.selected_model
    baseline = report.baseline_model
    print(f"n = {args.n}, seed = {args.seed}")
    print(f"dictionary: {report.dictionary['candidate_terms']} candidates, "
          f"{report.dictionary['kept_terms']} kept")
    print(f"screened terms: {len(report.screening['kept'])}")
    print()
    print(f"selected:  y = {model['intercept']:.6f}"
          + "".join(
              f" + {c:.6f} * {t}"
              for c, t in zip(model["coefficients"][1:], model["terms"])
          ))
    print(f"           adjusted R^2 = {model['r_squared_adj']:.12f}, "
          f"rmse = {model['rmse']:.3e}")
    print(f"baseline:  terms {baseline['terms']}, "
          f"adjusted R^2 = {baseline['r_squared_adj']:.6f}")
    print()
    print(f"report and residual/Bland-Altman CSVs in {args.out_dir}/")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
