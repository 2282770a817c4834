"""Scoring primitives and per-task aggregation for the benchmark."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .numcore import format_canonical, format_shortest, parse_number

SMAPE_EPS = 1e-100
SIG_CAP = 15

# tasks scored by numeric error; the list tasks score by canonicalized
# exact string match instead
NUMERIC_TASKS = ("add", "mult", "div", "exp", "mean", "std")
LIST_TASKS = ("minmax", "interval", "sorting")


def smape(pred: float, target: float) -> float:
    """Symmetric mean absolute percentage error, in [0, 1).

    Non-finite predictions score 1.0 (worst-case relative error).
    """
    if not math.isfinite(pred):
        return 1.0
    num = abs(pred - target)
    return num / (abs(target) + abs(pred) + SMAPE_EPS)


def log_smape(pred: float, target: float, M: int = SIG_CAP) -> float:
    """Fraction of the first M significant digits correct before the first error."""
    s = smape(pred, target)
    return min(1.0, -math.log10(s + SMAPE_EPS) / M)


def exact_match(pred: str, target_value: float) -> bool:
    """True iff pred parses to the same canonical 15-significant-digit value."""
    parsed = parse_number(pred)
    if parsed is None or not math.isfinite(parsed):
        return False
    return format_canonical(parsed).digits == format_canonical(target_value).digits


def generalized_mean(perfs: list[float], lam: float, eps: float = 1e-8) -> float:
    """((1/n) * sum((p + eps)**lam)) ** (1/lam); lam=-1 is the harmonic mean."""
    if not perfs:
        raise ValueError("perfs must be nonempty")
    if lam == 0:
        raise ValueError("lam must be nonzero")
    n = len(perfs)
    return (sum((p + eps) ** lam for p in perfs) / n) ** (1.0 / lam)


def canonicalize_answer(task: str, answer: str) -> str:
    """Normalize an answer string for exact-match comparison.

    Numbers re-render through the shortest roundtrip form, lists re-render
    element-wise, and interval letters just lose surrounding whitespace.
    """
    s = answer.strip()
    if task == "interval":
        return s
    if task == "sorting":
        inner = s.strip("[]")
        parts = [p.strip() for p in inner.split(",")] if inner.strip() else []
        vals = [parse_number(p) for p in parts]
        if any(v is None for v in vals):
            return s
        return "[" + ", ".join(format_shortest(v) for v in vals) + "]"
    v = parse_number(s)
    return s if v is None else format_shortest(v)


@dataclass
class TaskScore:
    count: int = 0
    exact: int = 0
    log_smape_sum: float = 0.0

    @property
    def exact_match_rate(self) -> float:
        return self.exact / self.count if self.count else 0.0

    @property
    def mean_log_smape(self) -> float:
        return self.log_smape_sum / self.count if self.count else 0.0


@dataclass
class ScoreReport:
    """Per-task exact-match / log-sMAPE aggregates plus a generalized-mean summary."""

    tasks: dict[str, TaskScore] = field(default_factory=dict)
    lam: float = -1.0
    eps: float = 1e-8

    def add(self, task: str, pred: str, answer: str, answer_value: float | None) -> None:
        ts = self.tasks.setdefault(task, TaskScore())
        ts.count += 1
        if task in LIST_TASKS or answer_value is None:
            hit = canonicalize_answer(task, pred) == canonicalize_answer(task, answer)
            ts.exact += hit
            ts.log_smape_sum += 1.0 if hit else 0.0
            return
        ts.exact += exact_match(pred, answer_value)
        parsed = parse_number(pred)
        ts.log_smape_sum += log_smape(parsed if parsed is not None else math.inf, answer_value)

    def aggregate(self) -> float:
        perfs = [t.mean_log_smape for t in self.tasks.values()]
        return generalized_mean(perfs, self.lam, self.eps)

    def to_dict(self) -> dict:
        out = {
            task: {
                "count": ts.count,
                "exact_match_rate": ts.exact_match_rate,
                "mean_log_smape": ts.mean_log_smape,
            }
            for task, ts in sorted(self.tasks.items())
        }
        return {
            "tasks": out,
            "aggregate": {"generalized_mean": self.aggregate(), "lambda": self.lam, "eps": self.eps},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)
