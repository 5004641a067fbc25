"""Regenerate the bundled fixtures from the published observation tables.

    python scripts/build_fixtures.py [--out src/tripart/fixtures]

Writes table1_fp64.csv, table2_recursion.csv, table3_devices.csv,
table4_fp32.csv and the fitted models fp64.json, fp32.json, depth.json.
"""
import argparse
from pathlib import Path

from tripart.autotune import Observation, ObservationSet, fit_depth_model, fit_knn
from tripart.data_io import save_model, write_observations

# N, observed opt m, streams, time at opt m [ms], corrected m, time at corrected m [ms]
TABLE1 = [
    (100, 4, 1, 0.310275, 4, None),
    (200, 4, 1, 0.315868, 4, None),
    (400, 4, 1, 0.327477, 4, None),
    (500, 4, 1, 0.325367, 4, None),
    (800, 4, 1, 0.340679, 4, None),
    (1_000, 4, 1, 0.331446, 4, None),
    (2_000, 4, 1, 0.351094, 4, None),
    (4_000, 4, 1, 0.373837, 4, None),
    (4_500, 4, 1, 0.385070, 4, None),
    (5_000, 8, 1, 0.380488, 8, None),
    (8_000, 8, 1, 0.424161, 8, None),
    (10_000, 8, 1, 0.438337, 8, None),
    (20_000, 8, 1, 0.536961, 8, None),
    (25_000, 8, 1, 0.591000, 8, None),
    (30_000, 16, 1, 0.614149, 16, None),
    (40_000, 16, 1, 0.711075, 16, None),
    (50_000, 16, 1, 0.785274, 16, None),
    (60_000, 20, 1, 0.874056, 20, None),
    (70_000, 35, 1, 0.956710, 20, 0.957520),
    (75_000, 40, 1, 0.995135, 20, 1.002325),
    (80_000, 32, 1, 1.034019, 32, None),
    (100_000, 40, 1, 1.195640, 32, 1.196261),
    (200_000, 64, 2, 1.857711, 32, 1.931349),
    (400_000, 64, 4, 3.270235, 32, 3.339023),
    (500_000, 40, 8, 4.043336, 32, 4.089002),
    (800_000, 64, 8, 6.055748, 32, 6.237866),
    (1_000_000, 32, 8, 7.635039, 32, None),
    (2_000_000, 32, 16, 14.49496, 32, None),
    (4_000_000, 32, 32, 27.83609, 32, None),
    (5_000_000, 32, 32, 34.51819, 32, None),
    (8_000_000, 64, 32, 53.92044, 32, 54.36878),
    (10_000_000, 32, 32, 66.71282, 32, None),
    (20_000_000, 64, 32, 131.0139, 64, None),
    (40_000_000, 64, 32, 259.8288, 64, None),
    (50_000_000, 64, 32, 323.7364, 64, None),
    (80_000_000, 64, 32, 516.1501, 64, None),
    (100_000_000, 64, 32, 643.1100, 64, None),
]

# Optimum recursion depth intervals, RTX A5000.
TABLE2 = {
    0: [100_000, 1_000_000, 2_000_000, 2_200_000],
    1: [2_300_000, 2_400_000, 2_500_000, 3_000_000, 4_000_000, 4_500_000, 4_800_000],
    2: [5_000_000, 8_000_000, 8_400_000, 9_200_000, 9_600_000],
    3: [10_000_000, 100_000_000],
}
# Partition-method time [ms] with R = 0..4 recursions for four of those sizes.
RECURSION_TIMES = {
    100_000: (0.704061, 0.8647671, 0.8682630, 0.9244519, 0.9688411),
    1_000_000: (3.176656, 3.301060, 3.420162, 3.458871, 3.760116),
    10_000_000: (27.67224, 26.04078, 25.39645, 25.07047, 26.51914),
    100_000_000: (271.9130, 243.6584, 242.6711, 241.1610, 243.2405),
}

# N, streams, opt m 2080 Ti, heuristic on 2080 Ti, opt m A5000, opt m 4080
TABLE3 = [
    (100, 1, 4, 4, 4, 4),
    (200, 1, 4, 4, 4, 4),
    (400, 1, 4, 4, 4, 4),
    (500, 1, 4, 4, 4, 4),
    (800, 1, 4, 4, 4, 8),
    (1_000, 1, 4, 4, 4, 4),
    (2_000, 1, 4, 4, 4, 4),
    (4_000, 1, 4, 4, 8, 8),
    (4_500, 1, 4, 4, 4, 4),
    (5_000, 1, 8, 8, 4, 4),
    (8_000, 1, 8, 8, 8, 4),
    (10_000, 1, 8, 8, 8, 8),
    (20_000, 1, 8, 8, 8, 16),
    (25_000, 1, 8, 8, 8, 8),
    (30_000, 1, 16, 16, 16, 16),
    (40_000, 1, 16, 16, 16, 16),
    (50_000, 1, 16, 16, 16, 16),
    (60_000, 1, 20, 20, 32, 40),
    (70_000, 1, 35, 20, 20, 20),
    (75_000, 1, 40, 20, 20, 40),
    (80_000, 1, 32, 32, 40, 32),
    (100_000, 1, 40, 32, 32, 32),
    (200_000, 2, 64, 32, 64, 64),
    (400_000, 3, 64, 32, 64, 64),
    (500_000, 8, 40, 32, 40, 40),
    (800_000, 8, 64, 32, 64, 64),
    (1_000_000, 8, 32, 32, 64, 64),
    (2_000_000, 16, 32, 32, 64, 64),
    (4_000_000, 32, 32, 32, 64, 64),
    (5_000_000, 32, 32, 32, 64, 64),
    (8_000_000, 32, 64, 32, 64, 64),
    (10_000_000, 32, 32, 32, 64, 64),
    (20_000_000, 32, 64, 64, 64, 64),
    (40_000_000, 32, 64, 64, 64, 64),
    (50_000_000, 32, 64, 64, 64, 64),
    (80_000_000, 32, 64, 64, 64, 64),
    (100_000_000, 32, 64, 64, 64, 64),
]

# N, observed opt m, streams, corrected opt m  (FP32)
TABLE4 = [
    (100, 4, 1, 4),
    (200, 4, 1, 4),
    (400, 4, 1, 4),
    (500, 4, 1, 4),
    (800, 4, 1, 4),
    (1_000, 4, 1, 4),
    (2_000, 4, 1, 4),
    (4_000, 4, 1, 4),
    (4_500, 4, 1, 4),
    (5_000, 8, 1, 8),
    (8_000, 8, 1, 8),
    (10_000, 8, 1, 8),
    (20_000, 16, 1, 8),
    (25_000, 20, 1, 8),
    (30_000, 16, 1, 16),
    (40_000, 16, 1, 16),
    (50_000, 16, 1, 16),
    (60_000, 16, 1, 16),
    (70_000, 16, 1, 16),
    (72_000, 32, 1, 32),
    (80_000, 32, 1, 32),
    (100_000, 32, 1, 32),
    (200_000, 64, 2, 32),
    (400_000, 64, 4, 32),
    (500_000, 40, 8, 32),
    (600_000, 64, 8, 32),
    (700_000, 40, 8, 32),
    (720_000, 64, 8, 64),
    (800_000, 64, 8, 64),
    (1_000_000, 64, 8, 64),
    (2_000_000, 64, 16, 64),
    (4_000_000, 64, 32, 64),
    (5_000_000, 64, 32, 64),
    (8_000_000, 64, 32, 64),
    (10_000_000, 64, 32, 64),
    (20_000_000, 64, 32, 64),
    (40_000_000, 40, 32, 64),
    (50_000_000, 40, 32, 64),
    (80_000_000, 40, 32, 64),
    (100_000_000, 40, 32, 64),
]


def table1():
    rows = []
    for n, m, streams, t, mc, tc in TABLE1:
        times = {m: t}
        if tc is not None:
            times[mc] = tc
        rows.append(Observation(n, m, mc, times, streams))
    return ObservationSet(tuple(rows), "rtx2080ti", "fp64")


def table2():
    rows = []
    for r, ns in TABLE2.items():
        for n in ns:
            times = dict(enumerate(RECURSION_TIMES[n])) if n in RECURSION_TIMES else None
            rows.append(Observation(n, r, times=times))
    return ObservationSet(tuple(rows), "rtxa5000", "fp64", kind="R")


def table3():
    sets = {"rtx2080ti": [], "rtxa5000": [], "rtx4080": []}
    for n, streams, m2080, heur, ma5000, m4080 in TABLE3:
        sets["rtx2080ti"].append(Observation(n, m2080, heur, streams=streams))
        sets["rtxa5000"].append(Observation(n, ma5000, streams=streams))
        sets["rtx4080"].append(Observation(n, m4080, streams=streams))
    return [ObservationSet(tuple(rows), device, "fp64") for device, rows in sets.items()]


def table4():
    rows = [Observation(n, m, mc, streams=s) for n, m, s, mc in TABLE4]
    return ObservationSet(tuple(rows), "rtx2080ti", "fp32")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "src/tripart/fixtures"))
    out = Path(ap.parse_args().out)
    out.mkdir(parents=True, exist_ok=True)

    t1, t2, t4 = table1(), table2(), table4()
    write_observations(t1, out / "table1_fp64.csv")
    write_observations(t2, out / "table2_recursion.csv")
    write_observations(table3(), out / "table3_devices.csv")
    write_observations(t4, out / "table4_fp32.csv")
    save_model(fit_knn(t1, 1, use_corrected=True), out / "fp64.json")
    save_model(fit_knn(t4, 1, use_corrected=True), out / "fp32.json")
    save_model(fit_depth_model(t2), out / "depth.json")
    print(f"fixtures written to {out}")


if __name__ == "__main__":
    main()
