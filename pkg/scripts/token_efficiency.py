#!/usr/bin/env python3
"""Token-count accounting across tasks and tokenizer schemes.

Generates a small dataset per task and reports the mean prompt/answer token
counts under single-digit and 3-digit-subword tokenization, next to the
single-token cost of one number slot per operand. The word-level handling
of non-numeric text is an accounting approximation, so these are
diagnostics, not benchmark claims.

Usage: python scripts/token_efficiency.py [--n 200] [--seed 0]
"""

import argparse

from numtok.encoders import digit_token_count
from numtok.taskgen import SamplerConfig, TASKS, generate


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'task':<10} {'in(single)':>10} {'in(sub3)':>9} {'out(single)':>11} "
          f"{'out(sub3)':>9} {'in(1-tok)':>9}")
    for task in TASKS:
        cfg = SamplerConfig(seed=args.seed, task=task, count=args.n)
        tin_s = tin_3 = tout_s = tout_3 = tone = 0
        for i in range(args.n):
            p = generate(cfg, i)
            tin_s += digit_token_count(p.question, "single_digit")
            tin_3 += digit_token_count(p.question, "subword3")
            tout_s += digit_token_count(p.answer, "single_digit")
            tout_3 += digit_token_count(p.answer, "subword3")
            # one token per number slot plus the non-numeric words
            words = digit_token_count(p.question, "single_digit") - sum(
                digit_token_count(str(abs(o)), "single_digit") for o in p.operands
            )
            tone += max(words, 0) + len(p.operands)
        n = args.n
        print(f"{task:<10} {tin_s / n:>10.1f} {tin_3 / n:>9.1f} {tout_s / n:>11.1f} "
              f"{tout_3 / n:>9.1f} {tone / n:>9.1f}")


if __name__ == "__main__":
    main()
