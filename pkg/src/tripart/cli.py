"""Command-line entry point: ``tripart {solve,bench,correct,fit,predict,report}``.

Exit status is 0 on success, 1 on usage errors and 2 on data or solver errors.
Relative input paths that do not exist are looked up under ``$TRIPART_DATA_DIR``
and then among the bundled fixtures, so ``--data table1_fp64.csv`` works anywhere.
"""
from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from . import autotune as at
from .bench import FakeClock, generate_system, sweep_m, sweep_r, sweeps_to_observations
from .data_io import (load_model, read_observations, resolve_path, save_model,
                      write_observations)
from .errors import TripartError
from .solver import RecursionPolicy, residual_inf, solve_partition, thomas_solve

SHIPPED_SEED = 191
USAGE_ERROR = 1
DATA_ERROR = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _int_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _size(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a size: {text!r}")
    if value != int(value) or value < 1:
        raise argparse.ArgumentTypeError(f"size must be a positive integer, got {text!r}")
    return int(value)


def _sizes(text):
    return [_size(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tripart", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve a generated system and print its residual")
    s.add_argument("--size", type=_size, required=True, help="system size N")
    s.add_argument("--m", type=_int_list, required=True,
                   help="sub-system size, or one size per level as a comma list")
    s.add_argument("--recursions", type=int, default=None,
                   help="recursion depth R; a single --m is reused on every level")
    s.add_argument("--seed", type=int, default=0, help="generator seed (default 0)")
    s.add_argument("--dominance", type=float, default=1.5, help="diagonal dominance factor (> 1)")
    s.add_argument("--precision", choices=["fp64", "fp32"], default="fp64")
    s.add_argument("--workers", type=int, default=None, help="threads for stages 1 and 3")
    s.add_argument("--check", action="store_true",
                   help="compare with Thomas elimination; exit 2 above 1e-10 (1e-4 for fp32)")

    b = sub.add_parser("bench", help="timing sweeps")
    bsub = b.add_subparsers(dest="sweep", required=True, parser_class=_Parser)
    for name, helptext in (("sweep-m", "time candidate sub-system sizes"),
                           ("sweep-r", "time recursion depths 0..max-r")):
        q = bsub.add_parser(name, help=helptext)
        q.add_argument("--size", type=_sizes, required=True, help="system size(s) N, comma-separated")
        q.add_argument("--runs", type=int, default=5, help="timed runs per candidate (default 5)")
        q.add_argument("--seed", type=int, default=0, help="generator seed (default 0)")
        q.add_argument("--out", required=True, help="observations CSV to write")
        q.add_argument("--device", default="cpu", help="device tag written to the CSV")
        q.add_argument("--fake-clock", metavar="TRACE", default=None,
                       help="replay durations from a CSV with a time_ms column")
        q.add_argument("--workers", type=int, default=None, help="threads for stages 1 and 3")
        if name == "sweep-m":
            q.add_argument("--m-list", type=_int_list, required=True, help="candidate sizes, e.g. 4,8,16")
        else:
            q.add_argument("--max-r", type=int, default=4, help="largest depth to try (<= 4)")
            q.add_argument("--model", required=True, help="sub-system size model (JSON)")

    c = sub.add_parser("correct", help="plateau-correct the labels of a timed observations file")
    c.add_argument("--data", required=True)
    c.add_argument("--tolerance", type=float, default=0.03, help="relative time tolerance (default 0.03)")
    c.add_argument("--out", required=True)
    _filters(c)

    f = sub.add_parser("fit", help="split, fit a kNN model and optionally report test scores")
    f.add_argument("--data", required=True)
    f.add_argument("--use-corrected", action="store_true", help="train on corrected labels")
    f.add_argument("--test-fraction", type=float, default=0.25,
                   help="held-out fraction; 0 fits on every row (default 0.25)")
    f.add_argument("--seed", type=int, default=SHIPPED_SEED,
                   help=f"split and cross-validation seed (default {SHIPPED_SEED})")
    f.add_argument("--k", default="auto", help="neighbour count, or 'auto' for grid search")
    f.add_argument("--folds", type=int, default=5, help="cross-validation folds for --k auto")
    f.add_argument("--no-stratify", action="store_true", help="plain shuffled split")
    f.add_argument("--out", required=True, help="model JSON to write")
    f.add_argument("--report", action="store_true", help="print accuracy and null accuracy")
    _filters(f)

    pr = sub.add_parser("predict", help="predict the sub-system size for N")
    pr.add_argument("--model", required=True)
    pr.add_argument("--size", type=_size, required=True)
    pr.add_argument("--recursions", default=None,
                    help="depth R, or 'auto' to take it from --depth-model; prints the policy")
    pr.add_argument("--depth-model", default=None, help="recursion depth model (JSON)")

    r = sub.add_parser("report", help="score a model against an observations file")
    r.add_argument("--model", required=True)
    r.add_argument("--data", required=True)
    r.add_argument("--use-corrected", action="store_true", help="score against corrected labels")
    r.add_argument("--plot-data", default=None, metavar="CSV",
                   help="write N, true and predicted label per row")
    _filters(r)
    return p


def _filters(parser):
    parser.add_argument("--device", default=None, help="device group to read")
    parser.add_argument("--precision", choices=["fp64", "fp32"], default=None,
                        help="precision group to read")


def _read(args):
    return read_observations(resolve_path(args.data), args.device, args.precision)


# -- commands ------------------------------------------------------------------


def cmd_solve(args, out):
    sizes = args.m
    if args.recursions is not None:
        if args.recursions < 0:
            raise UsageError("--recursions must be >= 0")
        if len(sizes) == 1:
            sizes = sizes * (args.recursions + 1)
        elif len(sizes) != args.recursions + 1:
            raise UsageError(f"--m lists {len(sizes)} sizes but --recursions {args.recursions} needs "
                             f"{args.recursions + 1}")
    if args.size < 2:
        raise UsageError("--size must be >= 2")
    try:
        policy = RecursionPolicy(tuple(sizes))
    except ValueError as exc:
        raise UsageError(str(exc))
    dtype = np.float32 if args.precision == "fp32" else np.float64
    system = generate_system(args.size, args.seed, args.dominance, dtype)
    x = solve_partition(system, policy, workers=args.workers)
    res = residual_inf(system, x)
    print(f"policy {','.join(map(str, policy.sizes))}", file=out)
    print(f"residual {res:.3e}", file=out)
    if args.check:
        tol = 1e-10 if dtype == np.float64 else 1e-4
        ref = thomas_solve(system)
        diff = float(np.max(np.abs(x - ref)) / max(1.0, float(np.max(np.abs(ref)))))
        ok = res <= tol and diff <= tol
        print(f"thomas_diff {diff:.3e}", file=out)
        print(f"check {'ok' if ok else 'FAILED'} (tolerance {tol:.0e})", file=out)
        return 0 if ok else DATA_ERROR
    return 0


def cmd_bench(args, out):
    clock = FakeClock.from_csv(resolve_path(args.fake_clock)) if args.fake_clock else None
    results = []
    if args.sweep == "sweep-m":
        for n in args.size:
            results.append(sweep_m(n, args.m_list, args.runs, clock, seed=args.seed, workers=args.workers))
    else:
        model = load_model(resolve_path(args.model))
        if not 0 <= args.max_r <= at.MAX_DEPTH:
            raise UsageError(f"--max-r must lie in 0..{at.MAX_DEPTH}")
        for n in args.size:
            results.append(sweep_r(n, args.max_r, model, args.runs, clock, seed=args.seed,
                                   workers=args.workers))
    for r in results:
        cells = " ".join(f"{c}:{t:.6f}" for c, t in r.times.items())
        print(f"N={r.n} best={r.argmin} {cells}", file=out)
    write_observations(sweeps_to_observations(results, args.device), args.out)
    return 0


def cmd_correct(args, out):
    data = _read(args)
    labels = at.plateau_correct(data, args.tolerance)
    fixed = data.with_corrected(labels)
    changed = [(n, a, b) for n, a, b in zip(data.ns, data.labels(), labels) if a != b]
    for n, a, b in changed:
        print(f"N={n}: {a} -> {b}", file=out)
    print(f"{len(changed)} of {len(data)} labels changed; runs {at.count_runs(data.labels())} -> "
          f"{at.count_runs(labels)}", file=out)
    write_observations(fixed, args.out)
    return 0


def cmd_fit(args, out):
    data = _read(args)
    corrected = args.use_corrected and data.kind == "m"
    if args.test_fraction == 0:
        train, test = data, None
    else:
        try:
            spec = at.SplitSpec(args.test_fraction, args.seed, not args.no_stratify)
        except ValueError as exc:
            raise UsageError(str(exc))
        train, test = at.split(data, spec, corrected)

    if args.k == "auto":
        k = at.grid_search_k(train, min(args.folds, len(train)), args.seed, corrected)
    else:
        try:
            k = int(args.k)
        except ValueError:
            raise UsageError(f"--k must be an integer or 'auto', got {args.k!r}")
    if data.kind == "R":
        model = at.fit_depth_model(train, k)
    else:
        model = at.fit_knn(train, k, corrected)
    save_model(model, args.out)

    print(f"k {k}", file=out)
    print(f"train {len(train)} test {0 if test is None else len(test)}", file=out)
    if args.report:
        if test is None:
            print(f"accuracy {at.accuracy(model, train, corrected):.4f} (training set)", file=out)
        else:
            rep = at.evaluate(model, train, test, corrected)
            print(f"accuracy {rep.accuracy:.4f}", file=out)
            print(f"null_accuracy {rep.null_accuracy:.4f}", file=out)
            for n, true, pred, ok in rep.rows:
                print(f"  N={n} true={true} predicted={pred}{'' if ok else '  MISS'}", file=out)
    return 0


def cmd_predict(args, out):
    model = load_model(resolve_path(args.model))
    m = at.predict(model, args.size)
    print(m, file=out)
    if args.recursions is None:
        return 0
    if args.recursions == "auto":
        if not args.depth_model:
            raise UsageError("--recursions auto needs --depth-model")
        depth = at.predict(load_model(resolve_path(args.depth_model)), args.size)
    else:
        try:
            depth = int(args.recursions)
        except ValueError:
            raise UsageError(f"--recursions must be an integer or 'auto', got {args.recursions!r}")
    policy = at.recursion_sizes(args.size, depth, model)
    levels = at.level_sizes(args.size, policy)
    print(f"R {depth}", file=out)
    print(f"sizes {','.join(map(str, policy.sizes))}", file=out)
    print(f"levels {','.join(map(str, levels))}", file=out)
    return 0


def cmd_report(args, out):
    model = load_model(resolve_path(args.model))
    data = _read(args)
    corrected = args.use_corrected and data.kind == "m"
    train = at.ObservationSet(tuple(at.Observation(n, lab) for n, lab in zip(model.ns, model.labels)))
    acc = at.accuracy(model, data, corrected)
    null = at.null_accuracy(train, data, corrected)
    print(f"accuracy {acc:.4f}", file=out)
    print(f"null_accuracy {null:.4f}", file=out)
    print("confusion (true -> predicted: count)", file=out)
    for (true, pred), count in at.confusion(model, data, corrected):
        print(f"  {true} -> {pred}: {count}", file=out)
    if data.kind == "m":
        rep = at.alignment_report(model)
        print(f"alignment {rep.summary()}", file=out)
        for n, m, ok in rep.misaligned():
            print(f"  misaligned N={n} m={m}", file=out)
    if args.plot_data:
        with open(args.plot_data, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["N", "true", "predicted", "correct"])
            for n, lab in zip(data.ns, data.labels(corrected)):
                pred = at.predict(model, n)
                w.writerow([n, lab, pred, int(pred == lab)])
    return 0


COMMANDS = {"solve": cmd_solve, "bench": cmd_bench, "correct": cmd_correct,
            "fit": cmd_fit, "predict": cmd_predict, "report": cmd_report}


def run_cli(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"tripart {args.command}: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (TripartError, OSError, ValueError) as exc:
        print(f"tripart {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return DATA_ERROR


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
