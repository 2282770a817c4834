"""Deterministic generation of the nine benchmark tasks.

Sampling: magnitudes are
uniform per decade over [1e-14, 1e15), significant-digit budgets are
uniform (decimal 1..17, or bit precision 1..53 for the secondary train
variant), addition oversamples similar magnitudes through a combined
precision split, division is built backwards from a sampled quotient, and
list tasks target a sampled mean over 1000 candidate draws. Every answer
is computed with >= 30-significant-digit decimal arithmetic, rounded to 15
significant digits, and rejection-resampled when the result leaves the
benchmark interval or its information vanishes at float64 precision.

Reproducibility: one counter-based Philox substream per (seed, task,
index), so generation is order-independent and shard-parallel runs are
byte-identical.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from pathlib import Path

import numpy as np

from . import __version__
from .curriculum import difficulty_of
from .numcore import format_shortest, round_sig, round_sig_bits


RNG_ID = "philox4x64-10"
TASKS = ("minmax", "interval", "sorting", "add", "mult", "div", "exp", "mean", "std")
TASK_IDS = {name: i for i, name in enumerate(TASKS)}

INTERVAL_LO = 1e-14
INTERVAL_HI = 1e15
DEC_LO = Decimal("1E-14")
DEC_HI = Decimal("1E+15")

MAX_RETRIES = 10_000
LIST_CANDIDATES = 1000
WORK_PREC = 60  # decimal digits for answer computation; far above the 15 kept

_SYS_TAIL = (
    "Do not explain, show steps, or add any extra text. "
    "Do not use code blocks to output the answer.\n"
    "DO NOT CALL ANY external APIs or use ANY external tool to solve the problem. "
    "DO NOT USE a calculator tool. DO NOT USE python. DO NOT USE Wolfram Alpha.\n"
)

SYSTEM_PROMPTS = {
    "minmax": (
        "You are an expert in numeracy. For each problem, output only valid JSON in this format: \n"
        '{"answer": <numeric_answer>}\n' + _SYS_TAIL
        + "The answer must be a single number, exactly as it appears in the list."
    ),
    "interval": (
        "You are an expert in numeracy. For each problem, output only valid JSON in this format: \n"
        '{"answer": <interval_multiple_choice_answer>}\n' + _SYS_TAIL
        + "The answer must be one of the following: A, B, C, D, E, F."
    ),
    "sorting": (
        "You are an expert in numeracy. For each problem, output only valid JSON in this format: \n"
        '{"answer": <sorted_list>}\n' + _SYS_TAIL
        + "The answer must be a list of numbers."
    ),
    "arith": (
        "You are an expert in numeracy. Return exactly one valid JSON object in this format: \n"
        '{"answer": <numeric_answer>}\n' + _SYS_TAIL
        + "If the answer is not an integer, give it as a decimal (not a fraction), "
        "rounded to at most 15 significant digits."
    ),
}


def system_prompt_for(task: str) -> str:
    if task in ("minmax", "interval", "sorting"):
        return SYSTEM_PROMPTS[task]
    return SYSTEM_PROMPTS["arith"]


@dataclass
class Problem:
    task: str
    operands: list[float]
    params: dict
    question: str
    system_prompt: str
    answer: str
    answer_value: float | None
    difficulty: int


@dataclass
class SamplerConfig:
    seed: int
    task: str
    count: int
    precision_base: int = 10
    sign_pct: tuple[int, int, int] = (40, 40, 20)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        if self.precision_base not in (2, 10):
            raise ValueError("precision_base must be 2 or 10")
        if sum(self.sign_pct) != 100:
            raise ValueError("sign percentages must sum to 100")


class RetryExhausted(RuntimeError):
    pass


def problem_rng(seed: int, task: str, index: int, salt: int = 0) -> np.random.Generator:
    """Independent substream for one problem; splittable and order-free."""
    word = (np.uint64(TASK_IDS[task] + 1) << np.uint64(48)) | (
        np.uint64(salt) << np.uint64(40)
    ) | np.uint64(index)
    return np.random.Generator(np.random.Philox(key=[np.uint64(seed), word]))


# ---------------------------------------------------------------------------
# operand sampling


def sample_magnitude(rng: np.random.Generator) -> float:
    """Uniform draw inside a uniformly chosen decade of [1e-14, 1e15)."""
    x = int(rng.integers(-14, 15))
    return float(rng.uniform(10.0**x, 10.0 ** (x + 1)))


def _precision_cap(base: int) -> int:
    return 17 if base == 10 else 53


def _round_prec(v: float, p: int, base: int) -> float:
    return round_sig(v, p) if base == 10 else round_sig_bits(v, p)


def in_interval(v: float) -> bool:
    return v == 0.0 or INTERVAL_LO <= abs(v) < INTERVAL_HI


def sample_operand(rng: np.random.Generator, precision_base: int = 10) -> float:
    """A magnitude draw rounded to a uniform significant-digit (or bit) budget."""
    cap = _precision_cap(precision_base)
    for _ in range(MAX_RETRIES):
        v = sample_magnitude(rng)
        p = int(rng.integers(1, cap + 1))
        w = _round_prec(v, p, precision_base)
        if in_interval(w) and w != 0.0:
            return w
    raise RetryExhausted("sample_operand")


def _sign_pair(rng: np.random.Generator, pct: tuple[int, int, int]) -> tuple[int, int]:
    u = rng.uniform(0.0, 100.0)
    if u < pct[0]:
        return 1, 1
    if u < pct[0] + pct[1]:
        return (-1, 1) if rng.integers(0, 2) == 0 else (1, -1)
    return -1, -1


def _split_precision(rng: np.random.Generator, base: int) -> tuple[int, int, int]:
    """Combined-precision split: p12 ~ U(2, 2*cap), p1 from a triangular around
    the midpoint (floored, clamped), p2 the remainder."""
    cap = _precision_cap(base)
    p12 = int(rng.integers(2, 2 * cap + 1))
    lo = math.ceil(p12 / 2)
    hi = min(p12 - 1, cap)
    if hi <= lo:
        p1 = lo
    else:
        t = rng.triangular(lo, min(lo + 1, hi), hi)
        p1 = int(min(max(math.floor(t), 1), hi))
    return p12, p1, p12 - p1


def _shortest_sig(v: float) -> int:
    """Significant digits of the shortest roundtrip rendering."""
    if v == 0.0:
        return 1
    d = Decimal(repr(v)).normalize()
    return len(d.as_tuple().digits)



def _dec(v: float) -> Decimal:
    """Decimal value of the rendered operand literal.

    Answers derive from what the prompt shows, so arithmetic always runs on
    the shortest-rendering decimal value, never on the float's binary tail.
    """
    return Decimal(format_shortest(v))

def _round15(d: Decimal) -> Decimal:
    if d.is_zero():
        return Decimal(0)
    with localcontext() as ctx:
        ctx.prec = WORK_PREC
        return d.quantize(Decimal(1).scaleb(d.adjusted() - 14))


def _answer_in_interval(d: Decimal) -> bool:
    return d.is_zero() or DEC_LO <= abs(d) < DEC_HI


def _finalize_answer(d: Decimal) -> tuple[str, float]:
    value = float(d)
    from .numcore import format_canonical

    return format_canonical(value).digits, value


# ---------------------------------------------------------------------------
# single-step arithmetic


def _gen_add(rng, cfg: SamplerConfig) -> Problem:
    base = cfg.precision_base
    for _ in range(MAX_RETRIES):
        p12, p1, p2 = _split_precision(rng, base)
        n1 = _round_prec(sample_magnitude(rng), p1, base)
        n2 = _round_prec(sample_magnitude(rng), p2, base)
        if not (in_interval(n1) and in_interval(n2)) or 0.0 in (n1, n2):
            continue
        if rng.integers(0, 2) == 1:
            n1, n2 = n2, n1
            p1, p2 = p2, p1
        s1, s2 = _sign_pair(rng, cfg.sign_pct)
        n1, n2 = s1 * n1, s2 * n2
        op = "+" if rng.integers(0, 2) == 0 else "-"
        with localcontext() as ctx:
            ctx.prec = WORK_PREC
            exact = _dec(n1) + _dec(n2) if op == "+" else _dec(n1) - _dec(n2)
        ans = _round15(exact)
        if not _answer_in_interval(ans):
            continue
        # vanishing information: the answer must not collapse onto either
        # operand's own contribution
        lone1 = _round15(_dec(n1))
        lone2 = _round15(_dec(n2) if op == "+" else -_dec(n2))
        if not exact.is_zero() and (ans == lone1 or ans == lone2):
            continue
        answer, value = _finalize_answer(ans)
        question = f"What is {format_shortest(n1)} {op} {format_shortest(n2)}?"
        meta = {"op": op, "p12": p12, "p1": p1, "p2": p2, "signs": [s1, s2]}
        return Problem("add", [n1, n2], meta, question, system_prompt_for("add"),
                       answer, value, 0)
    raise RetryExhausted("add")


def _gen_mult(rng, cfg: SamplerConfig) -> Problem:
    base = cfg.precision_base
    for _ in range(MAX_RETRIES):
        p12, p1, p2 = _split_precision(rng, base)
        n1 = _round_prec(sample_magnitude(rng), p1, base)
        n2 = _round_prec(sample_magnitude(rng), p2, base)
        if not (in_interval(n1) and in_interval(n2)) or 0.0 in (n1, n2):
            continue
        s1, s2 = _sign_pair(rng, cfg.sign_pct)
        n1, n2 = s1 * n1, s2 * n2
        with localcontext() as ctx:
            ctx.prec = WORK_PREC
            exact = _dec(n1) * _dec(n2)
        ans = _round15(exact)
        if not _answer_in_interval(ans) or ans.is_zero():
            continue
        answer, value = _finalize_answer(ans)
        question = f"What is {format_shortest(n1)} * {format_shortest(n2)}?"
        meta = {"p12": p12, "p1": p1, "p2": p2, "signs": [s1, s2]}
        prob = Problem("mult", [n1, n2], meta, question, system_prompt_for("mult"),
                       answer, value, 0)
        prob.difficulty = difficulty_of(prob, base)
        return prob
    raise RetryExhausted("mult")


def _gen_div(rng, cfg: SamplerConfig) -> Problem:
    base = cfg.precision_base
    for _ in range(MAX_RETRIES):
        p12, pq, pd = _split_precision(rng, base)
        q = _round_prec(sample_magnitude(rng), pq, base)
        d = _round_prec(sample_magnitude(rng), pd, base)
        if not (in_interval(q) and in_interval(d)) or 0.0 in (q, d):
            continue
        sq, sd = _sign_pair(rng, cfg.sign_pct)
        q, d = sq * q, sd * d
        with localcontext() as ctx:
            ctx.prec = WORK_PREC
            dividend_exact = _dec(q) * _dec(d)
        dividend = float(dividend_exact)
        if not in_interval(dividend) or dividend == 0.0:
            continue
        ans = _round15(_dec(q))
        if not _answer_in_interval(ans) or ans.is_zero():
            continue
        # the dividend is stored at float64; require that dividing the stored
        # value back preserves the quotient at 15 significant digits
        with localcontext() as ctx:
            ctx.prec = WORK_PREC
            recomputed = _dec(dividend) / _dec(d)
        if _round15(recomputed) != ans:
            continue
        answer, value = _finalize_answer(ans)
        question = f"What is {format_shortest(dividend)} / {format_shortest(d)}?"
        meta = {"p12": p12, "p_quotient": pq, "p_divisor": pd, "signs": [sq, sd]}
        prob = Problem("div", [dividend, d], meta, question, system_prompt_for("div"),
                       answer, value, 0)
        prob.difficulty = difficulty_of(prob, base)
        return prob
    raise RetryExhausted("div")


def _gen_exp(rng, cfg: SamplerConfig) -> Problem:
    base = cfg.precision_base
    cap = _precision_cap(base)
    for _ in range(MAX_RETRIES):
        # magnitude exponent of the base, oversampled near zero
        x = int(min(max(math.floor(rng.triangular(-14.0, 0.0, 15.0)), -14), 14))
        b = _round_prec(float(rng.uniform(10.0**x, 10.0 ** (x + 1))),
                        int(rng.integers(1, cap + 1)), base)
        if not in_interval(b) or b == 0.0:
            continue
        xi_max = max(1, 14 // (abs(x) + 1))
        clamped = xi_max == 1
        xi = int(rng.integers(1, xi_max + 1))
        root = bool(rng.integers(0, 2)) and xi > 1
        exp_val = (1.0 / xi) if root else float(xi)
        if rng.integers(0, 2) == 1:
            exp_val = -exp_val
        integral_exp = float(exp_val).is_integer()
        if b > 1.0 and integral_exp and rng.integers(0, 2) == 1:
            b = -b
        with localcontext() as ctx:
            ctx.prec = WORK_PREC
            try:
                exact = _dec(b) ** _dec(exp_val)
            except Exception:
                continue
        ans = _round15(exact)
        if not _answer_in_interval(ans) or ans.is_zero():
            continue
        answer, value = _finalize_answer(ans)
        question = f"What is {format_shortest(b)} ^ {format_shortest(exp_val)}?"
        meta = {"x": x, "xi": xi, "root": root, "clamped": clamped}
        prob = Problem("exp", [b, exp_val], meta, question, system_prompt_for("exp"),
                       answer, value, 0)
        prob.difficulty = difficulty_of(prob, base)
        return prob
    raise RetryExhausted("exp")


# ---------------------------------------------------------------------------
# list tasks


def _round_sig_vec(v: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Fast approximate significant-digit rounding; winners are re-validated
    against the exact decimal path before use."""
    av = np.abs(v)
    decade = np.floor(np.log10(np.where(av > 0, av, 1.0)))
    scale = np.power(10.0, p - 1 - decade)
    return np.round(v * scale) / scale


def _round_bits_vec(v: np.ndarray, p: np.ndarray) -> np.ndarray:
    m, e = np.frexp(v)
    scaled = m * np.exp2(p.astype(np.float64))
    r = np.round(scaled)
    carry = np.abs(r) >= np.exp2(p.astype(np.float64))
    r = np.where(carry, r / 2.0, r)
    e = np.where(carry, e + 1, e)
    return np.ldexp(r, (e - p).astype(np.int64))


def gen_number_list(
    rng: np.random.Generator,
    l: int,
    spread: int,
    target_mean: float,
    precision_base: int = 10,
) -> tuple[list[float], list[int]]:
    """Mean-targeted list: 1000 candidate draws, keep the closest-mean one.

    Elements live in [target - 10**spread, target + 10**spread], each rounded
    to its own uniform precision budget; candidates with zero spread or
    out-of-interval elements are discarded.
    """
    if l not in (2, 3, 4, 5):
        raise ValueError(f"list length must be 2..5, got {l}")
    cap = _precision_cap(precision_base)
    half = 10.0**spread
    for _ in range(20):
        u = rng.uniform(target_mean - half, target_mean + half, size=(LIST_CANDIDATES, l))
        ps = rng.integers(1, cap + 1, size=(LIST_CANDIDATES, l))
        rounded = (_round_sig_vec if precision_base == 10 else _round_bits_vec)(u, ps)
        absr = np.abs(rounded)
        ok = np.all((absr >= INTERVAL_LO) & (absr < INTERVAL_HI), axis=1)
        ok &= np.std(rounded, axis=1) != 0.0
        if not ok.any():
            continue
        means = rounded.mean(axis=1)
        dist = np.where(ok, np.abs(means - target_mean), np.inf)
        best = int(np.argmin(dist))
        elems = [float(v) for v in rounded[best]]
        pbest = [int(p) for p in ps[best]]
        if precision_base == 10:
            # the vector path rounds in binary; repair any element whose
            # shortest rendering overshoots its digit budget
            elems = [
                e if _shortest_sig(e) <= p else round_sig(e, p)
                for e, p in zip(elems, pbest)
            ]
        if len(set(elems)) == 1 or not all(in_interval(e) and e != 0 for e in elems):
            continue
        return elems, pbest
    raise RetryExhausted("gen_number_list")


def _spread_range(task: str, x: int) -> tuple[int, int]:
    lo = min(13, x - 13)
    hi = min(x + 2, 13) if task in ("minmax", "interval", "sorting") else min(x + 17, 13)
    return lo, hi


def _draw_list_context(rng, task: str, cfg: SamplerConfig):
    for _ in range(MAX_RETRIES):
        x = int(rng.integers(-14, 15))
        lo, hi = _spread_range(task, x)
        if lo > hi:
            continue  # resample the exponent on an empty spread range
        s = int(rng.integers(lo, hi + 1))
        l = int(rng.integers(2, 6))
        m = float(rng.uniform(10.0**x, 10.0 ** (x + 1)))
        try:
            elems, ps = gen_number_list(rng, l, s, m, cfg.precision_base)
        except RetryExhausted:
            continue
        with localcontext() as ctx:
            ctx.prec = WORK_PREC
            mean_exact = sum(_dec(e) for e in elems) / l
        if mean_exact.is_zero() and l in (2, 4):
            continue
        return x, s, l, m, elems, ps, mean_exact
    raise RetryExhausted(task)


def _render_list(elems: list[float]) -> str:
    return "[" + ", ".join(format_shortest(e) for e in elems) + "]"


def _gen_minmax(rng, cfg: SamplerConfig) -> Problem:
    x, s, l, m, elems, ps, _ = _draw_list_context(rng, "minmax", cfg)
    want_max = bool(rng.integers(0, 2))
    target = max(elems) if want_max else min(elems)
    question = (
        f"What is the {'maximum' if want_max else 'minimum'} of the list {_render_list(elems)}"
    )
    meta = {"l": l, "spread": s, "exponent": x, "ps": ps, "mode": "max" if want_max else "min"}
    return Problem("minmax", elems, meta, question, system_prompt_for("minmax"),
                   format_shortest(target), target, 0)


def _gen_sorting(rng, cfg: SamplerConfig) -> Problem:
    x, s, l, m, elems, ps, _ = _draw_list_context(rng, "sorting", cfg)
    ascending = bool(rng.integers(0, 2))
    ordered = sorted(elems, reverse=not ascending)
    question = (
        f"Sort the list {_render_list(elems)} in {'ascending' if ascending else 'descending'} order."
    )
    meta = {"l": l, "spread": s, "exponent": x, "ps": ps,
            "order": "ascending" if ascending else "descending"}
    return Problem("sorting", elems, meta, question, system_prompt_for("sorting"),
                   _render_list(ordered), None, 0)


def _gen_interval(rng, cfg: SamplerConfig) -> Problem:
    for _ in range(MAX_RETRIES):
        x, s, l, m, elems, ps, _ = _draw_list_context(rng, "interval", cfg)
        order = sorted(range(l), key=lambda i: elems[i])
        bounds = [elems[i] for i in order]
        ps = [ps[i] for i in order]
        pos = int(rng.integers(0, l + 1))
        off = 10.0**s / l
        if pos == 0:
            ref = bounds[0] - off
        elif pos == l:
            ref = bounds[-1] + off
        else:
            ref = float(rng.uniform(bounds[pos - 1], bounds[pos]))
        ref = _round_prec(ref, int(rng.integers(1, _precision_cap(cfg.precision_base) + 1)),
                          cfg.precision_base)
        if not in_interval(ref):
            continue
        region = sum(1 for b in bounds if b <= ref)
        if region != pos:
            continue  # rounding pushed the reference across a boundary
        letters = "ABCDEF"
        opts = [f"A: x < {format_shortest(bounds[0])}"]
        for i in range(1, l):
            opts.append(
                f"{letters[i]}: {format_shortest(bounds[i - 1])} <= x < {format_shortest(bounds[i])}"
            )
        opts.append(f"{letters[l]}: {format_shortest(bounds[-1])} <= x")
        question = f"What interval does x={format_shortest(ref)} belong to? " + ", ".join(opts)
        meta = {"l": l, "spread": s, "exponent": x, "ps": ps, "pos": pos, "ref": ref}
        return Problem("interval", bounds, meta, question, system_prompt_for("interval"),
                       letters[pos], None, 0)
    raise RetryExhausted("interval")


def _float_mean(elems: list[float]) -> float:
    acc = 0.0
    for e in elems:
        acc += e
    return acc / len(elems)


def _float_std(elems: list[float]) -> float:
    mu = _float_mean(elems)
    acc = 0.0
    for e in elems:
        acc += (e - mu) ** 2
    return math.sqrt(acc / len(elems))


def _gen_mean_std(rng, cfg: SamplerConfig, task: str) -> Problem:
    for _ in range(MAX_RETRIES):
        x, s, l, m, elems, ps, mean_exact = _draw_list_context(rng, task, cfg)
        with localcontext() as ctx:
            ctx.prec = WORK_PREC
            if task == "mean":
                exact = mean_exact
                naive = _float_mean(elems)
            else:
                var = sum((_dec(e) - mean_exact) ** 2 for e in elems) / l
                exact = var.sqrt()
                naive = _float_std(elems)
        ans = _round15(exact)
        if not _answer_in_interval(ans) or ans.is_zero():
            continue
        # vanishing information: a float64 evaluation must reach the same
        # 15-digit answer, else intermediates were unrepresentable
        if not math.isfinite(naive) or _round15(Decimal(naive)) != ans:
            continue
        answer, value = _finalize_answer(ans)
        question = f"What is the {task} of the list {_render_list(elems)}?"
        meta = {"l": l, "spread": s, "exponent": x, "ps": ps}
        prob = Problem(task, elems, meta, question, system_prompt_for(task),
                       answer, value, 0)
        prob.difficulty = difficulty_of(prob, cfg.precision_base)
        return prob
    raise RetryExhausted(task)


_GENERATORS = {
    "add": _gen_add,
    "mult": _gen_mult,
    "div": _gen_div,
    "exp": _gen_exp,
    "minmax": _gen_minmax,
    "sorting": _gen_sorting,
    "interval": _gen_interval,
    "mean": lambda rng, cfg: _gen_mean_std(rng, cfg, "mean"),
    "std": lambda rng, cfg: _gen_mean_std(rng, cfg, "std"),
}


def gen_problem(task: str, rng: np.random.Generator, cfg: SamplerConfig) -> Problem:
    if task not in _GENERATORS:
        raise ValueError(f"unknown task {task!r}")
    return _GENERATORS[task](rng, cfg)


def generate(cfg: SamplerConfig, index: int) -> Problem:
    """The index-th problem of a configuration, independent of all others."""
    salt = 0
    while True:
        rng = problem_rng(cfg.seed, cfg.task, index, salt)
        try:
            return gen_problem(cfg.task, rng, cfg)
        except RetryExhausted:
            salt += 1
            if salt > 64:
                raise


def render_prompt(p: Problem) -> tuple[str, str]:
    """(system, user) prompt pair for a problem."""
    return p.system_prompt, p.question


def header_record(cfg: SamplerConfig) -> dict:
    return {
        "task": "meta",
        "seed": cfg.seed,
        "rng": RNG_ID,
        "precision_base": cfg.precision_base,
        "version": __version__,
        "count": cfg.count,
    }


def problem_record(p: Problem) -> dict:
    return {
        "task": p.task,
        "question": p.question,
        "system": p.system_prompt,
        "operands": p.operands,
        "answer": p.answer,
        "answer_value": p.answer_value,
        "difficulty": p.difficulty,
        "meta": p.params,
    }


def write_dataset(problems: list[Problem], path: str | Path, cfg: SamplerConfig) -> None:
    try:
        with open(path, "w", encoding="utf-8") as f:
            f.write(json.dumps(header_record(cfg)) + "\n")
            for p in problems:
                f.write(json.dumps(problem_record(p)) + "\n")
    except OSError as e:
        raise OSError(f"cannot write dataset to {path}: {e}") from e


def read_dataset(path: str | Path) -> tuple[dict, list[Problem]]:
    header: dict = {}
    problems: list[Problem] = []
    try:
        with open(path, encoding="utf-8") as f:
            for line in f:
                if not line.strip():
                    continue
                obj = json.loads(line)
                if obj.get("task") == "meta":
                    header = obj
                    continue
                problems.append(
                    Problem(
                        task=obj["task"],
                        operands=obj["operands"],
                        params=obj["meta"],
                        question=obj["question"],
                        system_prompt=obj["system"],
                        answer=obj["answer"],
                        answer_value=obj["answer_value"],
                        difficulty=obj["difficulty"],
                    )
                )
    except OSError as e:
        raise OSError(f"cannot read dataset from {path}: {e}") from e
    return header, problems


def generate_dataset(cfg: SamplerConfig) -> list[Problem]:
    return [generate(cfg, i) for i in range(cfg.count)]
