"""Difficulty heuristics, the curriculum frontier scheduler, and multi-task
sampling-ratio control.

The scheduler holds no evaluator: callers supply per-difficulty performance
estimates and receive batch plans. Difficulty heuristics work on the digit
(or bit) representation of a problem's operands, so they apply to any
dataset regardless of how it will be consumed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from decimal import Decimal

import numpy as np

from .numcore import EXP_MASK, MANT_BITS, MANT_MASK, float_to_uint64

CURRICULUM_TASKS = ("mult", "div", "exp", "mean", "std")

ZETA0 = 0.9
PREVIEW_BUDGET = 0.2
PREVIEW_DECAY = 0.8
MOMENTUM = 0.5
LAMBDA = -1.0


def nonzero_digits(v: float, base: int = 10) -> int:
    """Nonzero digits of the shortest decimal rendering, or nonzero bits of
    the fixed-point binary significand."""
    if v == 0.0 or not math.isfinite(v):
        return 0
    if base == 10:
        digits = Decimal(repr(v)).normalize().as_tuple().digits
        return sum(1 for d in digits if d != 0)
    if base == 2:
        u = float_to_uint64(v)
        e = (u >> MANT_BITS) & EXP_MASK
        mant = u & MANT_MASK
        if e != 0:
            mant |= 1 << MANT_BITS
        return bin(mant).count("1")
    raise ValueError(f"base must be 2 or 10, got {base}")


def difficulty_of(problem, base: int = 10) -> int:
    """Per-task difficulty heuristic; non-curriculum tasks return 0.

    mult: sum of the operands' nonzero digits. div: dividend + divisor +
    quotient. exp: product over base, exponent index, and result. mean/std:
    spread - exponent + 15.
    """
    task = problem.task
    if task not in CURRICULUM_TASKS:
        return 0
    if task == "mult":
        return sum(nonzero_digits(v, base) for v in problem.operands)
    if task == "div":
        quotient = problem.answer_value or 0.0
        return sum(nonzero_digits(v, base) for v in problem.operands) + nonzero_digits(
            quotient, base
        )
    if task == "exp":
        b = problem.operands[0]
        xi = problem.params.get("xi", 1)
        result = problem.answer_value or 0.0
        return (
            nonzero_digits(b, base)
            * max(1, nonzero_digits(float(xi), base))
            * nonzero_digits(result, base)
        )
    # mean and std share one heuristic
    return max(0, int(problem.params["spread"]) - int(problem.params["exponent"]) + 15)


def preview_ratios(frontier: int, delta_max: int) -> dict[int, float]:
    """Exponentially decayed shares of the 20% preview budget above the frontier."""
    if frontier >= delta_max:
        return {}
    deltas = range(frontier + 1, delta_max + 1)
    weights = {d: PREVIEW_DECAY ** (d - frontier) for d in deltas}
    total = sum(weights.values())
    return {d: PREVIEW_BUDGET * w / total for d, w in weights.items()}


def advancement_threshold(
    delta: int,
    delta_max: int,
    step: int,
    lr: float,
    lr_max: float,
    S: float,
    L: float,
    zeta0: float = ZETA0,
) -> float:
    """Dynamic advancement threshold, decaying once past the S/L midpoints.

    The multiplier min(S/step, L/(lr_max - lr)) is clamped at 1 so the
    threshold never exceeds zeta0 * delta/delta_max early in training.
    """
    if step < 1:
        raise ValueError("step must be >= 1")
    if lr >= lr_max:
        raise ValueError("lr must stay below lr_max")
    if delta_max <= 0:
        raise ValueError("delta_max must be positive")
    mult = min(1.0, S / step, L / (lr_max - lr))
    return mult * zeta0 * delta / delta_max


def update_ratios(
    perfs: dict[str, float],
    old: dict[str, float],
    alpha: float = MOMENTUM,
    lam: float = LAMBDA,
) -> dict[str, float]:
    """Momentum blend of old ratios with the normalized need vector (1-p)^(1-lam).

    When every task is perfect the need vector degenerates to uniform.
    """
    if set(perfs) != set(old):
        raise ValueError("perfs and old ratios must cover the same tasks")
    tasks = list(old)
    need = {t: (1.0 - perfs[t]) ** (1.0 - lam) for t in tasks}
    total = sum(need.values())
    if total == 0.0:
        need = {t: 1.0 / len(tasks) for t in tasks}
    else:
        need = {t: w / total for t, w in need.items()}
    return {t: alpha * old[t] + (1.0 - alpha) * need[t] for t in tasks}


@dataclass
class TaskCurriculum:
    delta_max: int
    frontier: int = -1  # -1 means: initialize to 10% of delta_max
    perf: dict[int, float] = field(default_factory=dict)
    ratio: float = 0.0

    def __post_init__(self):
        if self.frontier < 0:
            self.frontier = int(0.1 * self.delta_max)

    def perf_at(self, delta: int) -> float:
        return self.perf.get(delta, 0.0)


@dataclass
class SchedulerState:
    tasks: dict[str, TaskCurriculum]
    step: int = 1
    lr: float = 0.0
    lr_max: float = 1.0
    S: float = 1.0
    L: float = 1.0
    zeta0: float = ZETA0
    alpha: float = MOMENTUM
    lam: float = LAMBDA

    def __post_init__(self):
        if not self.tasks:
            raise ValueError("scheduler needs at least one task")
        total = sum(t.ratio for t in self.tasks.values())
        if total == 0.0:
            for t in self.tasks.values():
                t.ratio = 1.0 / len(self.tasks)

    def ratios(self) -> dict[str, float]:
        return {name: t.ratio for name, t in self.tasks.items()}

    def set_ratios(self, ratios: dict[str, float]) -> None:
        for name, r in ratios.items():
            self.tasks[name].ratio = r

    def to_json(self) -> str:
        doc = {
            "step": self.step,
            "lr": self.lr,
            "lr_max": self.lr_max,
            "S": self.S,
            "L": self.L,
            "zeta0": self.zeta0,
            "preview_budget": PREVIEW_BUDGET,
            "preview_decay": PREVIEW_DECAY,
            "alpha": self.alpha,
            "lambda": self.lam,
            "tasks": {
                name: {
                    "frontier": t.frontier,
                    "delta_max": t.delta_max,
                    "ratio": t.ratio,
                    "perf": {str(k): v for k, v in sorted(t.perf.items())},
                }
                for name, t in self.tasks.items()
            },
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, payload: str) -> "SchedulerState":
        doc = json.loads(payload)
        tasks = {
            name: TaskCurriculum(
                delta_max=t["delta_max"],
                frontier=t["frontier"],
                perf={int(k): v for k, v in t.get("perf", {}).items()},
                ratio=t.get("ratio", 0.0),
            )
            for name, t in doc["tasks"].items()
        }
        return cls(
            tasks=tasks,
            step=doc.get("step", 1),
            lr=doc.get("lr", 0.0),
            lr_max=doc.get("lr_max", 1.0),
            S=doc.get("S", 1.0),
            L=doc.get("L", 1.0),
            zeta0=doc.get("zeta0", ZETA0),
            alpha=doc.get("alpha", MOMENTUM),
            lam=doc.get("lambda", LAMBDA),
        )


def _largest_remainder(weights: dict, total: int) -> dict:
    """Integer allocation of `total` proportional to weights, deterministic."""
    wsum = sum(weights.values())
    if wsum <= 0 or total <= 0:
        return {k: 0 for k in weights}
    shares = {k: total * w / wsum for k, w in weights.items()}
    counts = {k: int(math.floor(s)) for k, s in shares.items()}
    leftover = total - sum(counts.values())
    order = sorted(weights, key=lambda k: (counts[k] - shares[k], repr(k)))
    for k in order[:leftover]:
        counts[k] += 1
    return counts


def next_batch_plan(
    state: SchedulerState,
    rng: np.random.Generator | None,
    batch_tokens: int,
) -> list[tuple[str, int, int]]:
    """Allocate a batch across tasks and difficulties, then advance frontiers.

    Per task: 80% of the budget goes to difficulties at or below the frontier,
    weighted by (1 - p) need with the lambda=0 rule; 20% previews the levels
    just above, exponentially decayed. A task whose frontier equals its max
    difficulty spends everything below it. The frontier advances when its
    performance beats the dynamic threshold.
    """
    task_counts = _largest_remainder(state.ratios(), batch_tokens)
    plan: list[tuple[str, int, int]] = []
    for name, tc in state.tasks.items():
        budget = task_counts.get(name, 0)
        if budget <= 0:
            continue
        pre = preview_ratios(tc.frontier, tc.delta_max)
        preview_total = int(round(sum(pre.values()) * budget))
        main_total = budget - preview_total
        main_deltas = range(0, tc.frontier + 1)
        need = {d: (1.0 - tc.perf_at(d)) for d in main_deltas}
        if sum(need.values()) == 0.0:
            need = {d: 1.0 for d in main_deltas}
        main_counts = _largest_remainder(need, main_total)
        preview_counts = _largest_remainder(pre, preview_total) if pre else {}
        for d in sorted(main_counts):
            if main_counts[d]:
                plan.append((name, d, main_counts[d]))
        for d in sorted(preview_counts):
            if preview_counts[d]:
                plan.append((name, d, preview_counts[d]))
        # frontier advancement check, with the threshold evaluated at the
        # frontier's own difficulty
        if 0 <= tc.frontier < tc.delta_max:
            zeta = advancement_threshold(
                tc.frontier, tc.delta_max, state.step, state.lr,
                state.lr_max, state.S, state.L, state.zeta0,
            )
            if tc.perf_at(tc.frontier) > zeta:
                tc.frontier = min(tc.frontier + 1, tc.delta_max)
    return plan
