"""Rebuild the derived results from the bundled fixtures and print them.

Covers the step-function model, split scores under the shipped seed, grid
search, the recursion-depth model, per-level policies, plateau correction and
the alignment check.  Nothing here touches a timer, so the output is the same
on every machine.

    python scripts/reproduce_tables.py [--tolerance 0.03] [--plot-dir DIR]
"""
import argparse
import csv
from pathlib import Path

from tripart import autotune as at
from tripart.cli import SHIPPED_SEED
from tripart.data_io import fixture_path, read_observations


def padded(data, slowdown=1.10):
    """Give every size a time for every candidate, unseen ones ``slowdown`` x best."""
    cands = sorted({r.label for r in data} | {r.corrected_label for r in data})
    rows = []
    for r in data:
        best = min(r.times.values())
        times = {m: r.times.get(m, best * slowdown) for m in cands}
        rows.append(at.Observation(r.n, r.label, r.corrected_label, times, r.streams))
    return at.ObservationSet(tuple(rows), data.device, data.precision)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tolerance", type=float, default=0.03)
    ap.add_argument("--plot-dir", type=Path, default=None)
    args = ap.parse_args()

    fp64 = read_observations(fixture_path("table1_fp64.csv"))
    fp32 = read_observations(fixture_path("table4_fp32.csv"))
    depth = read_observations(fixture_path("table2_recursion.csv"))

    print("== sub-system size, FP64 ==")
    model = at.fit_knn(fp64, 1, True)
    for n, lab in zip(fp64.ns, fp64.labels(True)):
        print(f"  N={n:>11,d}  corrected={lab:>2d}  predicted={at.predict(model, n):>2d}")

    for name, data in (("FP64", fp64), ("FP32", fp32)):
        spec = at.SplitSpec(0.25, SHIPPED_SEED)
        for corrected in (True, False):
            train, test = at.split(data, spec, corrected)
            rep = at.evaluate(at.fit_knn(train, 1, corrected), train, test, corrected)
            tag = "corrected" if corrected else "observed"
            print(f"{name} {tag:>9s}: test accuracy {rep.accuracy:.3f}  null {rep.null_accuracy:.3f}  "
                  f"LOO {at.leave_one_out_accuracy(data, 1, corrected):.3f}")
        print(f"{name} grid search k = {at.grid_search_k(data, 5, SHIPPED_SEED, True)}")

    print("== recursion depth ==")
    dmodel = at.fit_depth_model(depth)
    for n in (100_000, 2_200_000, 2_300_000, 4_800_000, 5_000_000, 9_600_000, 10**7, 10**8):
        r = at.predict(dmodel, n)
        policy = at.recursion_sizes(n, r, model)
        print(f"  N={n:>11,d}  R={r}  sizes={list(policy.sizes)}  levels={at.level_sizes(n, policy)}")

    print(f"== plateau correction, tolerance {args.tolerance} ==")
    table = padded(fp64)
    labels = at.plateau_correct(table, args.tolerance)
    for n, obs, pub, got in zip(table.ns, table.labels(), table.labels(True), labels):
        if obs != pub or got != pub:
            print(f"  N={n:>11,d}  observed={obs:>2d}  published={pub:>2d}  ours={got:>2d}"
                  f"{'' if got == pub else '  differs'}")

    print("== alignment ==")
    print("  " + at.alignment_report(model).summary())

    if args.plot_dir:
        args.plot_dir.mkdir(parents=True, exist_ok=True)
        with open(args.plot_dir / "step_fp64.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["N", "corrected", "predicted"])
            for n, lab in zip(fp64.ns, fp64.labels(True)):
                w.writerow([n, lab, at.predict(model, n)])
        print(f"plot data written to {args.plot_dir}")


if __name__ == "__main__":
    main()
