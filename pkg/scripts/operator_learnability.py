#!/usr/bin/env python3
"""Operator-learnability comparison at desk scale.

Trains one-hidden-layer MLPs to map operand encodings to the encoding of
the result, then reports held-out exact-decode rates. Addition in the
sinusoidal scheme has a local closed-form solution, so it must train to
high accuracy; multiplication there requires a decode-compute-reencode
detour and is expected to fail at this scale. The bit-payload rates are
reported for contrast.

Usage: python scripts/operator_learnability.py [--quick]
"""

import argparse
import json

from numtok.probe import ProbeTask, operator_learn_demo


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true", help="smaller budgets, ~1 minute")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    args = ap.parse_args()

    train, steps = (6_000, 2_500) if args.quick else (20_000, 6_000)
    runs = [
        ("fone", "add", 0.02),
        ("fone", "mult", 0.02),
        ("bittoken", "add", 0.05),
        ("bittoken", "mult", 0.05),
    ]
    reports = []
    for scheme, op, eta in runs:
        cfg = ProbeTask(
            kind="operator_learn", scheme=scheme, operation=op,
            train_size=train, eval_size=500, steps=steps, eta=eta,
            batch=512, hidden=512, operand_range=(0, 1000), seed=args.seed,
        )
        rep = operator_learn_demo(cfg)
        reports.append(rep)
        print(
            f"{scheme:>9} {op:<5} exact decode {rep.exact_decode_rate:.3f}   "
            f"final loss {rep.final_loss:.5f}"
        )
    if args.out:
        with open(args.out, "w") as f:
            f.write("[" + ",\n".join(r.to_json() for r in reports) + "]\n")
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
