/**
 * Batch API over the toolkit's external interfaces.
 *
 * Every function shells out to the CLI and exchanges data through the file
 * formats it owns (NTKE matrices, JSONL datasets, JSON reports), so results
 * are bit-identical to direct CLI runs. The API is batch-only: per-scalar
 * calls would pay the process-spawn cost per number.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { CliOptions, runCli, withTempDir } from "./cli.js";
import { NtkeMatrix, readNtke, writeNtke } from "./ntke.js";

export type Scheme = "bittoken" | "fone" | "xval";

export interface EncodeOptions {
  scheme?: Scheme;
  dModel?: number;
  includeReciprocal?: boolean;
}

export interface GenerateOptions {
  seed: number;
  task: string;
  n: number;
  precisionBase?: 2 | 10;
}

export interface DatasetResult {
  /** Exact bytes of the JSONL file, header line included. */
  raw: Buffer;
  header: Record<string, unknown>;
  problems: Record<string, unknown>[];
}

export interface SchedulerStepInput {
  /** Task-level performance in [0, 1], one entry per task. */
  perfs: Record<string, number>;
  /** Current sampling ratios; must sum to 1. */
  ratios: Record<string, number>;
  deltaMax?: Record<string, number>;
  alpha?: number;
  lambda?: number;
  batchTokens?: number;
}

export interface SchedulerStepResult {
  ratios: Record<string, number>;
  frontiers: Record<string, number>;
  plan: [string, number, number][];
}

function renderValue(v: number): string {
  if (Number.isFinite(v)) return String(v);
  if (Number.isNaN(v)) return "NaN";
  return v > 0 ? "Infinity" : "-Infinity";
}

/** Handle to one encoder configuration plus CLI plumbing options. */
export class BoundSession {
  constructor(readonly encode_options: EncodeOptions = {}, readonly cli: CliOptions = {}) {}

  private encodeArgs(): string[] {
    const o = this.encode_options;
    const args = ["--scheme", o.scheme ?? "bittoken", "--d-model", String(o.dModel ?? 768)];
    if (o.includeReciprocal === false) args.push("--no-reciprocal");
    return args;
  }

  /** Encode a batch of numbers; the matrix data is a view over the file body. */
  encode_batch(values: number[]): NtkeMatrix {
    return withTempDir((dir) => {
      const input = join(dir, "values.txt");
      const output = join(dir, "batch.ntke");
      writeFileSync(input, values.map(renderValue).join("\n") + (values.length ? "\n" : ""));
      runCli(["encode", ...this.encodeArgs(), "--in", input, "--out", output], this.cli);
      return readNtke(output);
    });
  }

  /** Decode an embedding matrix back into numbers. */
  decode_batch(matrix: NtkeMatrix): number[] {
    return withTempDir((dir) => {
      const input = join(dir, "batch.ntke");
      const output = join(dir, "values.txt");
      writeNtke(input, matrix);
      runCli(["decode", ...this.encodeArgs(), "--in", input, "--out", output], this.cli);
      return readFileSync(output, "utf-8")
        .split("\n")
        .filter((line) => line.length > 0)
        .map(Number);
    });
  }

  /** Generate a benchmark dataset; returns raw bytes plus parsed records. */
  generate_dataset(opts: GenerateOptions): DatasetResult {
    return withTempDir((dir) => {
      const output = join(dir, "dataset.jsonl");
      const args = [
        "gen",
        "--task", opts.task,
        "--n", String(opts.n),
        "--seed", String(opts.seed),
        "--out", output,
      ];
      if (opts.precisionBase) args.push("--precision-base", String(opts.precisionBase));
      runCli(args, this.cli);
      const raw = readFileSync(output);
      const lines = raw.toString("utf-8").split("\n").filter((l) => l.length > 0);
      const records = lines.map((l) => JSON.parse(l));
      return { raw, header: records[0], problems: records.slice(1) };
    });
  }

  /** Score a predictions JSONL file against a reference dataset. */
  score_file(predPath: string, refPath: string): Record<string, unknown> {
    return withTempDir((dir) => {
      const output = join(dir, "report.json");
      runCli(["score", "--pred", predPath, "--ref", refPath, "--out", output], this.cli);
      return JSON.parse(readFileSync(output, "utf-8"));
    });
  }

  /** One scheduler update: ratios from performance, plan, frontier moves. */
  scheduler_step(input: SchedulerStepInput): SchedulerStepResult {
    const tasks = Object.keys(input.ratios);
    const deltaMax: Record<string, number> = input.deltaMax ?? {};
    for (const t of tasks) deltaMax[t] = deltaMax[t] ?? 1;
    const config = {
      tasks,
      delta_max: deltaMax,
      steps: 1,
      batch_tokens: input.batchTokens ?? 64,
      lr: 0.0,
      lr_max: 1.0,
      S: 1,
      L: 1,
      alpha: input.alpha ?? 0.5,
      lambda: input.lambda ?? -1.0,
      initial_ratios: input.ratios,
      performance: { type: "table", perfs: [input.perfs] },
    };
    return withTempDir((dir) => {
      const cfgPath = join(dir, "sim.json");
      const planPath = join(dir, "plan.jsonl");
      writeFileSync(cfgPath, JSON.stringify(config));
      runCli(["curriculum-sim", "--sim-config", cfgPath, "--out", planPath], this.cli);
      const line = readFileSync(planPath, "utf-8").split("\n")[0];
      const parsed = JSON.parse(line);
      return { ratios: parsed.ratios, frontiers: parsed.frontiers, plan: parsed.plan };
    });
  }
}
