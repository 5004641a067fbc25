"""File formats: the long-format observations CSV and the JSON model document.

Observations CSV::

    N,precision,device,streams,m,time_ms,is_opt,corrected_m,opt_R

One line per (N, candidate).  For depth data the ``m`` column holds the
candidate recursion depth and ``opt_R`` the optimum on every line of that N.
Lines are sorted by ``(N, m, precision, device)``; optional fields are empty.
"""
from __future__ import annotations

import csv
import io
import json
import os
from importlib import resources
from pathlib import Path
from typing import Iterable

from .autotune import HeuristicModel, Observation, ObservationSet
from .errors import BadNumber, MalformedHeader, SchemaError, VersionMismatch

HEADER = ["N", "precision", "device", "streams", "m", "time_ms", "is_opt", "corrected_m", "opt_R"]
PRECISIONS = ("fp64", "fp32")
MODEL_VERSION = 1
DATA_DIR_ENV = "TRIPART_DATA_DIR"


def fixture_path(name: str) -> Path:
    """Path of a bundled fixture (``table1_fp64.csv``, ``fp64.json``, ...)."""
    return Path(str(resources.files("tripart") / "fixtures" / name))


def resolve_path(name: str | os.PathLike) -> Path:
    """Find an input file: as given, then under ``$TRIPART_DATA_DIR``, then among the
    bundled fixtures."""
    p = Path(name)
    if p.exists() or p.is_absolute():
        return p
    roots = []
    if os.environ.get(DATA_DIR_ENV):
        roots.append(Path(os.environ[DATA_DIR_ENV]))
    pkg = Path(str(resources.files("tripart")))
    roots += [pkg, pkg / "fixtures"]
    for root in roots:
        if (root / p).exists():
            return root / p
    return p


def format_time(t: float) -> str:
    """Six decimals when that is exact, the shortest round-trip repr otherwise."""
    text = f"{t:.6f}"
    return text if float(text) == t else repr(float(t))


def _int(text: str, line: int, column: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise BadNumber(line, f"{column}={text!r} is not an integer") from None


def _float(text: str, line: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise BadNumber(line, f"{column}={text!r} is not a number") from None
    if value != value or value in (float("inf"), float("-inf")):
        raise BadNumber(line, f"{column}={text!r} is not finite")
    return value


def _opt_int(text, line, column):
    return None if text == "" else _int(text, line, column)


# -- observations ------------------------------------------------------------


def parse_observations(text: str) -> dict[tuple[str, str], ObservationSet]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedHeader("empty file") from None
    if header != HEADER:
        raise MalformedHeader(f"expected header {','.join(HEADER)!r}, got {','.join(header)!r}")

    groups: dict[tuple[str, str], dict[int, list]] = {}
    for line, rec in enumerate(reader, start=2):
        if not rec:
            continue
        if len(rec) != len(HEADER):
            raise SchemaError(f"line {line}: expected {len(HEADER)} fields, got {len(rec)}")
        n_s, precision, device, streams_s, m_s, time_s, opt_s, corr_s, optr_s = rec
        if precision not in PRECISIONS:
            raise SchemaError(f"line {line}: precision must be fp64 or fp32, got {precision!r}")
        if opt_s not in ("0", "1"):
            raise BadNumber(line, f"is_opt={opt_s!r} must be 0 or 1")
        entry = (
            line,
            _int(m_s, line, "m"),
            None if time_s == "" else _float(time_s, line, "time_ms"),
            opt_s == "1",
            _opt_int(corr_s, line, "corrected_m"),
            _opt_int(optr_s, line, "opt_R"),
            _int(streams_s, line, "streams"),
        )
        n = _int(n_s, line, "N")
        groups.setdefault((precision, device), {}).setdefault(n, []).append(entry)

    out = {}
    for (precision, device), by_n in groups.items():
        rows = []
        kinds = set()
        for n, entries in by_n.items():
            rows.append(_build_row(n, entries))
            kinds.add("R" if entries[0][5] is not None else "m")
        if len(kinds) > 1:
            raise SchemaError(f"{precision}/{device}: opt_R must be set on all rows or none")
        out[(precision, device)] = ObservationSet(tuple(rows), device, precision, kinds.pop())
    return out


def _build_row(n, entries) -> Observation:
    first = entries[0][0]
    optimal = [e for e in entries if e[3]]
    if len(optimal) != 1:
        raise SchemaError(f"line {first}: N={n} needs exactly one is_opt=1 line, has {len(optimal)}")
    for field_idx, name in ((4, "corrected_m"), (5, "opt_R"), (6, "streams")):
        if len({e[field_idx] for e in entries}) > 1:
            raise SchemaError(f"line {first}: {name} differs between lines of N={n}")
    _, m_opt, _, _, corrected, opt_r, streams = optimal[0]
    timed = [e for e in entries if e[2] is not None]
    if timed and len(timed) != len(entries):
        raise SchemaError(f"line {first}: N={n} mixes timed and untimed lines")
    if not timed and len(entries) > 1:
        raise SchemaError(f"line {first}: N={n} has several untimed lines")
    ms = [e[1] for e in entries]
    if len(set(ms)) != len(ms):
        raise SchemaError(f"line {first}: duplicate m for N={n}")
    label = m_opt
    if opt_r is not None:
        if opt_r != m_opt:
            raise SchemaError(f"line {first}: opt_R={opt_r} but the is_opt line has m={m_opt}")
        label = opt_r
    times = {e[1]: e[2] for e in timed} if timed else None
    return Observation(n, label, corrected, times, streams)


def read_observation_sets(path) -> dict[tuple[str, str], ObservationSet]:
    """All ``(precision, device)`` groups of an observations file."""
    return parse_observations(Path(path).read_text(encoding="utf-8"))


def read_observations(path, device: str | None = None, precision: str | None = None) -> ObservationSet:
    groups = read_observation_sets(path)
    keys = [k for k in groups
            if (precision is None or k[0] == precision) and (device is None or k[1] == device)]
    if len(keys) != 1:
        raise SchemaError(f"{path}: expected one precision/device group, found {sorted(groups)}"
                          f" (filter precision={precision}, device={device})")
    return groups[keys[0]]


def _lines(data: ObservationSet):
    for r in data.rows:
        opt_r = r.label if data.kind == "R" else None
        corrected = None if data.kind == "R" else r.corrected_label
        cands = sorted(r.times) if r.times else [r.label]
        for m in cands:
            t = r.times[m] if r.times else None
            yield (r.n, m, data.precision, data.device), [
                str(r.n), data.precision, data.device, str(r.streams), str(m),
                "" if t is None else format_time(t),
                "1" if m == r.label else "0",
                "" if corrected is None else str(corrected),
                "" if opt_r is None else str(opt_r),
            ]


def format_observations(sets: ObservationSet | Iterable[ObservationSet]) -> str:
    if isinstance(sets, ObservationSet):
        sets = [sets]
    lines = sorted(line for s in sets for line in _lines(s))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for _, rec in lines:
        w.writerow(rec)
    return buf.getvalue()


def write_observations(sets, path) -> None:
    Path(path).write_text(format_observations(sets), encoding="utf-8")


# -- models ------------------------------------------------------------------


def model_to_dict(model: HeuristicModel) -> dict:
    return {
        "version": MODEL_VERSION,
        "transform": model.transform,
        "k": model.k,
        "pairs": [{"n": n, "label": lab} for n, lab in zip(model.ns, model.labels)],
        "labels": list(model.label_domain),
        "metadata": dict(model.metadata),
    }


def model_from_dict(doc) -> HeuristicModel:
    if not isinstance(doc, dict):
        raise SchemaError("model document must be a JSON object")
    missing = [k for k in ("version", "transform", "k", "pairs", "labels", "metadata") if k not in doc]
    if missing:
        raise SchemaError(f"model document lacks field(s) {missing}")
    if doc["version"] != MODEL_VERSION:
        raise VersionMismatch(f"model version {doc['version']!r}, expected {MODEL_VERSION}")
    try:
        pairs = [(int(p["n"]), int(p["label"])) for p in doc["pairs"]]
        k = doc["k"]
        if not isinstance(k, int) or isinstance(k, bool):
            raise TypeError("k must be an integer")
        labels = tuple(int(v) for v in doc["labels"])
        metadata = {str(a): str(b) for a, b in doc["metadata"].items()}
    except (TypeError, KeyError, ValueError, AttributeError) as exc:
        raise SchemaError(f"malformed model document: {exc}") from None
    if not pairs:
        raise SchemaError("model has no training pairs")
    ns, labs = zip(*pairs)
    try:
        return HeuristicModel(tuple(ns), tuple(labs), k, str(doc["transform"]), labels, metadata)
    except ValueError as exc:
        raise SchemaError(str(exc)) from None


def format_model(model: HeuristicModel) -> str:
    return json.dumps(model_to_dict(model), indent=2, sort_keys=True) + "\n"


def save_model(model: HeuristicModel, path) -> None:
    Path(path).write_text(format_model(model), encoding="utf-8")


def load_model(path) -> HeuristicModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from None
    return model_from_dict(doc)
