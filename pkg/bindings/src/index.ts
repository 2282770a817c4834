export { BoundSession } from "./api.js";
export type {
  DatasetResult,
  EncodeOptions,
  GenerateOptions,
  Scheme,
  SchedulerStepInput,
  SchedulerStepResult,
} from "./api.js";
export { CliError, runCli, withTempDir } from "./cli.js";
export type { CliOptions } from "./cli.js";
export { NtkeFormatError, readNtke, row, writeNtke } from "./ntke.js";
export type { NtkeMatrix } from "./ntke.js";
