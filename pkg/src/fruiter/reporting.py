"""Result files, per-technique aggregates and fidelity/utility correlations."""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

from fruiter.errors import CorpusIOError, InsufficientDataError, ValidationError
from fruiter.model import ResultEntry

RESULT_FIELDS = (
    "source_app", "target_app", "test_id", "technique",
    "n_src_events", "n_trans_events", "n_gt_events",
    "correct", "incorrect", "missed", "non_exist",
    "tp", "fp", "tn", "fn",
    "accuracy", "precision", "recall",
    "effort", "reduction",
)
_TEXT_FIELDS = RESULT_FIELDS[:4]
_RATIO_FIELDS = ("accuracy", "precision", "recall", "reduction")
_INT_FIELDS = tuple(f for f in RESULT_FIELDS if f not in _TEXT_FIELDS and f not in _RATIO_FIELDS)

SKIPPED_FIELDS = ("source_app", "target_app", "test_id", "technique", "reason", "detail")

FIDELITY_METRICS = ("tp", "fp", "tn", "fn", "accuracy", "precision", "recall")
UTILITY_METRICS = ("effort", "reduction")
AGGREGATE_METRICS = ("accuracy", "precision", "recall", "effort", "reduction")

Row = Mapping[str, object]


def entry_row(entry: ResultEntry) -> dict:
    """Scalar view of an entry; ratios become floats, undefined ones None."""
    fm, um = entry.fidelity_metrics, entry.utility_metrics
    c, i, m, n = entry.fidelity_sets.sizes

    def f(x: Optional[Fraction]) -> Optional[float]:
        return None if x is None else float(x)

    return {
        "source_app": entry.source_app,
        "target_app": entry.target_app,
        "test_id": entry.test_id,
        "technique": entry.technique,
        "n_src_events": len(entry.source_events),
        "n_trans_events": len(entry.transferred_test),
        "n_gt_events": len(entry.gt_events),
        "correct": c, "incorrect": i, "missed": m, "non_exist": n,
        "tp": fm.tp, "fp": fm.fp, "tn": fm.tn, "fn": fm.fn,
        "accuracy": f(fm.accuracy), "precision": f(fm.precision), "recall": f(fm.recall),
        "effort": um.effort, "reduction": f(um.reduction),
    }


def _as_row(x: Union[ResultEntry, Row]) -> Row:
    return entry_row(x) if isinstance(x, ResultEntry) else x


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        # repr is the shortest string that parses back to the same double
        return repr(value)
    return str(value)


def write_results_csv(entries: Iterable[Union[ResultEntry, Row]], path) -> Path:
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(RESULT_FIELDS)
            for e in entries:
                row = _as_row(e)
                w.writerow([_fmt(row[k]) for k in RESULT_FIELDS])
    except OSError as exc:
        raise CorpusIOError(path, str(exc)) from exc
    return path


def read_results_csv(path) -> list[dict]:
    path = Path(path)
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(header) != RESULT_FIELDS:
                raise ValidationError("unexpected results header", path=str(path))
            rows = []
            for lineno, raw in enumerate(reader, start=2):
                if len(raw) != len(RESULT_FIELDS):
                    raise ValidationError(f"line {lineno}: expected {len(RESULT_FIELDS)} fields", path=str(path))
                row: dict = dict(zip(RESULT_FIELDS, raw))
                try:
                    for k in _INT_FIELDS:
                        row[k] = int(row[k])
                    for k in _RATIO_FIELDS:
                        row[k] = float(row[k]) if row[k] != "" else None
                except ValueError as exc:
                    raise ValidationError(f"line {lineno}: {exc}", path=str(path)) from exc
                rows.append(row)
    except OSError as exc:
        raise CorpusIOError(path, str(exc)) from exc
    return rows


def write_skipped_csv(skipped: Iterable, path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SKIPPED_FIELDS)
        for s in skipped:
            w.writerow([getattr(s, k) for k in SKIPPED_FIELDS])
    return path


@dataclass(frozen=True)
class Cell:
    mean: Optional[float]
    n: int
    skipped: int


def _mean(values: Sequence[float]) -> Optional[float]:
    return math.fsum(values) / len(values) if values else None


def aggregate(entries: Iterable[Union[ResultEntry, Row]], group_by: str = "technique",
              averaging: str = "transfer") -> dict[str, dict[str, Cell]]:
    """Mean of each metric per group, skipping undefined values.

    ``averaging="transfer"`` weighs every transfer equally; ``"pair"`` first
    averages within each (source, target) app pair, then across pairs. Groups
    appear in first-seen order.
    """
    if averaging not in ("transfer", "pair"):
        raise ValueError(f"averaging must be 'transfer' or 'pair', got {averaging!r}")
    groups: dict[str, list[Row]] = {}
    for e in entries:
        row = _as_row(e)
        groups.setdefault(str(row[group_by]), []).append(row)

    table = {}
    for key, rows in groups.items():
        cells = {}
        for metric in AGGREGATE_METRICS:
            defined = [r for r in rows if r[metric] is not None]
            skipped = len(rows) - len(defined)
            if averaging == "transfer":
                mean = _mean([float(r[metric]) for r in defined])
            else:
                by_pair = defaultdict(list)
                for r in defined:
                    by_pair[r["source_app"], r["target_app"]].append(float(r[metric]))
                mean = _mean([_mean(v) for v in by_pair.values()])
            cells[metric] = Cell(mean, len(defined), skipped)
        table[key] = cells
    return table


def pearson(xs: Sequence[Optional[float]], ys: Sequence[Optional[float]]) -> Optional[float]:
    """Sample Pearson correlation; None when undefined.

    Pairs with a missing member are dropped first. The result is undefined
    with fewer than two pairs left or when either side has zero variance.
    """
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    pairs = [(float(x), float(y)) for x, y in zip(xs, ys) if x is not None and y is not None]
    if len(pairs) < 2:
        return None
    mx = math.fsum(x for x, _ in pairs) / len(pairs)
    my = math.fsum(y for _, y in pairs) / len(pairs)
    dx = [x - mx for x, _ in pairs]
    dy = [y - my for _, y in pairs]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0.0 or syy == 0.0:
        return None
    # one sqrt of the product keeps exact linear data at exactly +-1
    denom = math.sqrt(sxx * syy)
    if math.isinf(denom):
        denom = math.sqrt(sxx) * math.sqrt(syy)
    r = math.fsum(a * b for a, b in zip(dx, dy)) / denom
    return max(-1.0, min(1.0, r))


def correlation_matrix(entries: Iterable[Union[ResultEntry, Row]],
                       per_technique: bool = False) -> dict[str, dict[str, Optional[float]]]:
    """Pearson coefficient for each fidelity metric against each utility metric.

    Points are result entries, or with ``per_technique`` the per-technique
    means (undefined values skipped).
    """
    rows = [_as_row(e) for e in entries]
    if per_technique:
        rows = list(_technique_means(rows).values())
    if len(rows) < 2:
        raise InsufficientDataError(f"correlation needs at least 2 points, got {len(rows)}")
    return {
        fm: {um: pearson([r[fm] for r in rows], [r[um] for r in rows]) for um in UTILITY_METRICS}
        for fm in FIDELITY_METRICS
    }


def _technique_means(rows: Sequence[Row]) -> dict[str, dict]:
    groups: dict[str, list[Row]] = {}
    for r in rows:
        groups.setdefault(str(r["technique"]), []).append(r)
    out = {}
    for tech, rs in groups.items():
        out[tech] = {
            m: _mean([float(r[m]) for r in rs if r[m] is not None])
            for m in FIDELITY_METRICS + UTILITY_METRICS
        }
    return out


AGGREGATE_FOOTER = "# means skip undefined ratios; n_<metric> counts defined values, skipped_<metric> undefined ones"
CORRELATE_FOOTER = "# pairs with an undefined member are dropped; empty cell = undefined (zero variance or < 2 pairs)"


def aggregate_table(table: Mapping[str, Mapping[str, Cell]]) -> list[list[str]]:
    header = ["technique"]
    for m in AGGREGATE_METRICS:
        header += [f"mean_{m}", f"n_{m}", f"skipped_{m}"]
    out = [header]
    for tech, cells in table.items():
        row = [tech]
        for m in AGGREGATE_METRICS:
            c = cells[m]
            row += [_fmt(c.mean), str(c.n), str(c.skipped)]
        out.append(row)
    return out


def correlation_table(matrix: Mapping[str, Mapping[str, Optional[float]]]) -> list[list[str]]:
    out = [["fidelity_metric", *UTILITY_METRICS]]
    for fm in FIDELITY_METRICS:
        out.append([fm, *(_fmt(matrix[fm][um]) for um in UTILITY_METRICS)])
    return out


def render_delimited(rows: Sequence[Sequence[str]], footer: Optional[str] = None) -> str:
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    if footer:
        buf.write(footer + "\n")
    return buf.getvalue()
