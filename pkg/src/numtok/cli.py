"""Command-line surface binding the toolkit into reproducible workflows.

Subcommands: gen, encode, decode, parse, score, curriculum-sim, probe,
bench-run. Exit codes: 0 success, 1 validation error, 2 I/O error.
Option precedence: flags > environment variables (NUMTOK_*) > JSON config
file (--config).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import ntke
from .bench import BenchConfig, run_bench
from .curriculum import SchedulerState, TaskCurriculum, next_batch_plan, update_ratios
from .encoders import (
    BitTokenConfig,
    FoNEConfig,
    bittoken_decode_batch,
    bittoken_encode_batch,
    fone_decode,
    fone_encode,
    payload_to_probs,
    xval_decode,
    xval_encode,
)
from .metrics import ScoreReport
from .numcore import format_shortest, parse_number
from .probe import ProbeTask, noise_sweep, operator_learn_demo, train_identity_head
from .taskgen import SamplerConfig, TASKS, generate, read_dataset, write_dataset
from .textparse import detokenize, stream_from_jsonl, stream_to_jsonl, tokenize_with_num


class ValidationError(Exception):
    pass


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        return json.loads(Path(path).read_text())
    except OSError as e:
        raise OSError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ValidationError(f"config {path} is not valid JSON: {e}") from e


def _resolve(flag, env_name: str, config: dict, key: str, default, cast):
    """Option precedence: explicit flag > environment variable > config file."""
    if flag is not None:
        return flag
    env = os.environ.get(env_name)
    if env is not None:
        return cast(env)
    if key in config:
        return cast(config[key])
    return default


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen(args, config) -> int:
    seed = _resolve(args.seed, "NUMTOK_SEED", config, "seed", 0, int)
    cfg = SamplerConfig(
        seed=seed, task=args.task, count=args.n, precision_base=args.precision_base
    )
    shards = max(1, args.shards)
    bounds = [round(i * cfg.count / shards) for i in range(shards + 1)]
    problems = []
    for s in range(shards):
        problems.extend(generate(cfg, i) for i in range(bounds[s], bounds[s + 1]))
    write_dataset(problems, args.out, cfg)
    print(f"wrote {len(problems) + 1} lines to {args.out}", file=sys.stderr)
    return 0


def _read_values(path: str) -> np.ndarray:
    vals = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            v = parse_number(line)
            if v is None:
                raise ValidationError(f"not a number: {line!r}")
            vals.append(v)
    return np.array(vals, dtype=np.float64)


def _bittoken_cfg(args) -> BitTokenConfig:
    return BitTokenConfig(
        include_reciprocal=not args.no_reciprocal, base=args.base, d_model=args.d_model
    )


def cmd_encode(args, config) -> int:
    d_model = _resolve(args.d_model, "NUMTOK_D_MODEL", config, "d_model", 768, int)
    args.d_model = d_model
    values = _read_values(getattr(args, "in"))
    if args.scheme == "bittoken":
        cfg = _bittoken_cfg(args)
        payload = bittoken_encode_batch(values, cfg)
        rows = np.zeros((len(values), d_model), dtype=np.float64)
        rows[:, : cfg.payload_width] = payload
    elif args.scheme == "fone":
        cfg = FoNEConfig(d_model=d_model)
        rows = np.stack([fone_encode(float(v), cfg).values for v in values]) if len(values) else np.zeros((0, d_model))
    else:
        rows = np.array([[xval_encode(float(v))] for v in values], dtype=np.float64)
    ntke.write_matrix(args.out, rows)
    return 0


def cmd_decode(args, config) -> int:
    d_model = _resolve(args.d_model, "NUMTOK_D_MODEL", config, "d_model", 768, int)
    args.d_model = d_model
    matrix = ntke.read_matrix(getattr(args, "in")).astype(np.float64)
    if args.scheme == "bittoken":
        cfg = _bittoken_cfg(args)
        if matrix.shape[1] < cfg.payload_width:
            raise ValidationError(
                f"matrix dims {matrix.shape[1]} below payload width {cfg.payload_width}"
            )
        probs = payload_to_probs(matrix[:, : cfg.payload_width])
        values = bittoken_decode_batch(probs, cfg)
    elif args.scheme == "fone":
        cfg = FoNEConfig(d_model=max(args.d_model, matrix.shape[1]))
        values = [fone_decode(row[: cfg.payload_width], cfg) for row in matrix]
    else:
        values = [xval_decode(float(row[0])) for row in matrix]
    out = sys.stdout if args.out == "-" else open(args.out, "w")
    try:
        for v in values:
            out.write(format_shortest(float(v)) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_parse(args, config) -> int:
    text = sys.stdin.read()
    if args.detokenize:
        sys.stdout.write(detokenize(stream_from_jsonl(text)))
    else:
        sys.stdout.write(stream_to_jsonl(tokenize_with_num(text)))
    return 0


def cmd_score(args, config) -> int:
    _, problems = read_dataset(args.ref)
    preds = []
    with open(args.pred) as f:
        for line in f:
            if not line.strip():
                continue
            obj = json.loads(line)
            if obj.get("task") == "meta":
                continue
            preds.append(obj)
    if len(preds) != len(problems):
        raise ValidationError(
            f"prediction count {len(preds)} does not match dataset count {len(problems)}"
        )
    report = ScoreReport()
    for problem, pred in zip(problems, preds):
        answer = pred.get("answer", "")
        if not isinstance(answer, str):
            answer = json.dumps(answer)
        report.add(problem.task, answer, problem.answer, problem.answer_value)
    payload = report.to_json()
    if args.out:
        Path(args.out).write_text(payload + "\n")
    else:
        print(payload)
    return 0


def cmd_curriculum_sim(args, config) -> int:
    sim = _load_config(args.sim_config)
    for key in ("tasks", "delta_max", "steps"):
        if key not in sim:
            raise ValidationError(f"curriculum-sim config needs {key!r}")
    tasks = {
        name: TaskCurriculum(delta_max=int(sim["delta_max"][name]))
        for name in sim["tasks"]
    }
    state = SchedulerState(
        tasks=tasks,
        step=1,
        lr=float(sim.get("lr", 0.0)),
        lr_max=float(sim.get("lr_max", 1.0)),
        S=float(sim.get("S", sim["steps"] / 2)),
        L=float(sim.get("L", sim.get("lr_max", 1.0) / 2)),
        alpha=float(sim.get("alpha", 0.5)),
        lam=float(sim.get("lambda", -1.0)),
    )
    if "initial_ratios" in sim:
        state.set_ratios({k: float(v) for k, v in sim["initial_ratios"].items()})
    perf_model = sim.get("performance", {"type": "ramp", "rate": 0.001})
    batch_tokens = int(sim.get("batch_tokens", 1024))

    def perf_at(step: int, task: str, delta: int) -> float:
        if perf_model["type"] == "ramp":
            return min(1.0, perf_model["rate"] * step / (1 + delta))
        if perf_model["type"] == "table":
            row = perf_model["perfs"][min(step - 1, len(perf_model["perfs"]) - 1)]
            cell = row[task]
            return float(cell[str(delta)] if isinstance(cell, dict) else cell)
        raise ValidationError(f"unknown performance model {perf_model['type']!r}")

    lines = []
    for step in range(1, int(sim["steps"]) + 1):
        state.step = step
        for name, tc in state.tasks.items():
            for d in range(0, tc.delta_max + 1):
                tc.perf[d] = perf_at(step, name, d)
        task_perf = {
            name: sum(tc.perf[d] for d in range(0, tc.frontier + 1)) / (tc.frontier + 1)
            for name, tc in state.tasks.items()
        }
        state.set_ratios(update_ratios(task_perf, state.ratios(), state.alpha, state.lam))
        plan = next_batch_plan(state, None, batch_tokens)
        lines.append(
            json.dumps(
                {
                    "step": step,
                    "ratios": state.ratios(),
                    "frontiers": {n: t.frontier for n, t in state.tasks.items()},
                    "plan": [[t, d, c] for t, d, c in plan],
                }
            )
        )
    payload = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(payload)
    else:
        sys.stdout.write(payload)
    if args.state_out:
        Path(args.state_out).write_text(state.to_json() + "\n")
    return 0


def cmd_probe(args, config) -> int:
    seed = _resolve(args.seed, "NUMTOK_SEED", config, "seed", 7, int)
    if args.kind == "identity":
        cfg = ProbeTask(kind="identity_decode", scheme="bittoken", seed=seed,
                        steps=args.steps or 5000)
        report = train_identity_head(cfg)
        payload = report.to_json()
    elif args.kind == "operator":
        cfg = ProbeTask(
            kind="operator_learn", scheme=args.scheme, operation=args.operation,
            seed=seed, train_size=20_000, eval_size=500,
            steps=args.steps or 6000, eta=0.02,
        )
        report = operator_learn_demo(cfg)
        payload = report.to_json()
    else:  # noise
        sigmas = [float(s) for s in args.sigmas.split(",")]
        curve = noise_sweep(args.scheme, sigmas, n=args.n, seed=seed)
        payload = json.dumps(
            {"task": "noise_sweep", "scheme": args.scheme, "seed": seed,
             "curve": {str(k): v for k, v in curve.items()}},
            indent=2,
        )
    if args.out:
        Path(args.out).write_text(payload + "\n")
    else:
        print(payload)
    return 0


def cmd_bench_run(args, config) -> int:
    endpoint = _resolve(args.endpoint, "NUMTOK_ENDPOINT", config, "endpoint", None, str)
    model = _resolve(args.model, "NUMTOK_MODEL", config, "model", None, str)
    if not endpoint or not model:
        raise ValidationError("bench-run requires --endpoint and --model")
    _, problems = read_dataset(args.dataset)
    cfg = BenchConfig(
        endpoint=endpoint,
        model=model,
        api_key_env=args.api_key_env,
        concurrency=args.concurrency,
        max_retries=args.max_retries,
        timeout=args.timeout,
    )
    records = run_bench(cfg, problems)
    failures = sum(1 for r in records if r["error"])
    with open(args.out, "w") as f:
        for r in records:
            f.write(json.dumps(r) + "\n")
    if failures:
        print(f"warning: {failures}/{len(records)} items failed", file=sys.stderr)
    print(f"wrote {len(records)} predictions to {args.out}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="numtok", description=__doc__)
    ap.add_argument("--config", help="JSON config file (lowest-precedence options)")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a benchmark dataset (JSONL)")
    g.add_argument("--task", required=True, choices=TASKS)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int)
    g.add_argument("--out", required=True)
    g.add_argument("--precision-base", type=int, default=10, choices=(2, 10))
    g.add_argument("--shards", type=int, default=1)
    g.set_defaults(fn=cmd_gen)

    e = sub.add_parser("encode", help="encode numbers into an NTKE matrix file")
    e.add_argument("--scheme", required=True, choices=("bittoken", "fone", "xval"))
    e.add_argument("--d-model", dest="d_model", type=int)
    e.add_argument("--in", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--no-reciprocal", action="store_true")
    e.add_argument("--base", type=int, default=2, choices=(2, 10))
    e.set_defaults(fn=cmd_encode)

    d = sub.add_parser("decode", help="decode an NTKE matrix file back to values")
    d.add_argument("--scheme", required=True, choices=("bittoken", "fone", "xval"))
    d.add_argument("--d-model", dest="d_model", type=int)
    d.add_argument("--in", required=True)
    d.add_argument("--out", default="-")
    d.add_argument("--no-reciprocal", action="store_true")
    d.add_argument("--base", type=int, default=2, choices=(2, 10))
    d.set_defaults(fn=cmd_decode)

    p = sub.add_parser("parse", help="tokenize stdin text into a number/text stream")
    p.add_argument("--detokenize", action="store_true",
                   help="reverse: read stream JSONL on stdin, emit original text")
    p.set_defaults(fn=cmd_parse)

    s = sub.add_parser("score", help="score a predictions file against a dataset")
    s.add_argument("--pred", required=True)
    s.add_argument("--ref", required=True)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_score)

    c = sub.add_parser("curriculum-sim", help="run the scheduler on synthetic performance")
    c.add_argument("--sim-config", dest="sim_config", required=True)
    c.add_argument("--out")
    c.add_argument("--state-out", dest="state_out")
    c.set_defaults(fn=cmd_curriculum_sim)

    pr = sub.add_parser("probe", help="run a learnability probe")
    pr.add_argument("--kind", required=True, choices=("identity", "operator", "noise"))
    pr.add_argument("--scheme", default="bittoken", choices=("bittoken", "fone", "xval"))
    pr.add_argument("--operation", default="add", choices=("add", "mult"))
    pr.add_argument("--seed", type=int)
    pr.add_argument("--steps", type=int)
    pr.add_argument("--sigmas", default="0.0,0.25,0.49")
    pr.add_argument("--n", type=int, default=10_000)
    pr.add_argument("--out")
    pr.set_defaults(fn=cmd_probe)

    b = sub.add_parser("bench-run", help="query a chat-completions endpoint over a dataset")
    b.add_argument("--dataset", required=True)
    b.add_argument("--endpoint")
    b.add_argument("--model")
    b.add_argument("--api-key-env", dest="api_key_env", default="NUMTOK_API_KEY")
    b.add_argument("--out", required=True)
    b.add_argument("--concurrency", type=int, default=4)
    b.add_argument("--max-retries", dest="max_retries", type=int, default=3)
    b.add_argument("--timeout", type=float, default=60.0)
    b.set_defaults(fn=cmd_bench_run)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 1
    try:
        config = _load_config(args.config)
        return args.fn(args, config)
    except (ValidationError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
