"""Time the partition solver on this CPU and fit a local size heuristic.

Sweeps the candidate sub-system sizes over a range of N, writes the timings as
an observations CSV, applies plateau correction and fits a 1-NN model.  The
numbers depend on the machine; the pipeline is the same one the GPU tables
went through.

    python scripts/cpu_sweep.py --out-dir runs/cpu [--runs 3] [--max-n 1000000]
"""
import argparse
from pathlib import Path

import numpy as np

from tripart import autotune as at
from tripart.bench import sweep_m, sweeps_to_observations
from tripart.data_io import save_model, write_observations


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", type=Path, required=True)
    ap.add_argument("--runs", type=int, default=3)
    ap.add_argument("--max-n", type=int, default=1_000_000)
    ap.add_argument("--candidates", default="4,8,16,20,32,40,64")
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--tolerance", type=float, default=0.03)
    args = ap.parse_args()

    cands = [int(c) for c in args.candidates.split(",")]
    sizes = sorted({int(round(n)) for n in np.geomspace(1_000, args.max_n, 12)})
    results = []
    for n in sizes:
        r = sweep_m(n, cands, args.runs, workers=args.workers)
        print(f"N={n:>9,d}  best m={r.argmin:>2d}  " +
              "  ".join(f"{m}:{t:.3f}" for m, t in r.times.items()))
        results.append(r)

    data = sweeps_to_observations(results, device="cpu")
    data = data.with_corrected(at.plateau_correct(data, args.tolerance))
    args.out_dir.mkdir(parents=True, exist_ok=True)
    write_observations(data, args.out_dir / "sweep.csv")
    model = at.fit_knn(data, 1, True)
    save_model(model, args.out_dir / "model.json")
    print(f"corrected labels: {data.labels(True)}")
    print(f"wrote {args.out_dir / 'sweep.csv'} and {args.out_dir / 'model.json'}")


if __name__ == "__main__":
    main()
