/** Subprocess plumbing: every binding goes through the toolkit CLI. */

import { execFileSync } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export interface CliOptions {
  /** Interpreter used to launch the toolkit, e.g. ["python3", "-m", "numtok"]. */
  command?: string[];
}

const DEFAULT_COMMAND = ["python3", "-m", "numtok"];

export class CliError extends Error {
  constructor(message: string, readonly exitCode: number | null) {
    super(message);
  }
}

export function runCli(args: string[], opts: CliOptions = {}): string {
  const cmd = opts.command ?? DEFAULT_COMMAND;
  try {
    return execFileSync(cmd[0], [...cmd.slice(1), ...args], {
      encoding: "utf-8",
      maxBuffer: 1 << 28,
    });
  } catch (err: any) {
    const code = typeof err.status === "number" ? err.status : null;
    const stderr = err.stderr ? String(err.stderr) : String(err.message ?? err);
    // surface the CLI's own one-line message unchanged
    throw new CliError(stderr.trim(), code);
  }
}

export function withTempDir<T>(fn: (dir: string) => T): T {
  const dir = mkdtempSync(join(tmpdir(), "numtok-"));
  try {
    return fn(dir);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}
