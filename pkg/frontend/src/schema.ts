/** Parsers for the benchmark artifacts: trace CSVs, summaries, failure maps. */

import { readFileSync } from "fs";

export const TRACE_COLUMNS = [
  "iter",
  "f",
  "grad_dual_norm",
  "gamma",
  "backtracks",
  "step_norm",
  "oracle_calls",
  "wall_seconds",
  "accepted",
] as const;

export const FAILURE_MAP_COLUMNS = ["x1", "x2", "status", "iters", "final_f"] as const;

export interface TraceRow {
  iter: number;
  f: number;
  gradDualNorm: number;
  gamma: number;
  backtracks: number;
  stepNorm: number;
  oracleCalls: number;
  wallSeconds: number;
  accepted: boolean;
}

export interface RunSummary {
  name?: string;
  dim?: number;
  status?: string;
  iterates?: [number, number][];
}

export interface FailureCell {
  x1: number;
  x2: number;
  status: string;
  iters: number;
  finalF: number;
}

export class SchemaError extends Error {}

function checkHeader(path: string, header: string, expected: readonly string[]): void {
  const cols = header.split(",");
  for (let i = 0; i < expected.length; i++) {
    if (cols[i] !== expected[i]) {
      throw new SchemaError(
        `${path}: expected column '${expected[i]}' at position ${i + 1}, found '${cols[i] ?? "<missing>"}'`,
      );
    }
  }
  if (cols.length !== expected.length) {
    throw new SchemaError(`${path}: unexpected extra column '${cols[expected.length]}'`);
  }
}

function num(path: string, line: number, column: string, raw: string): number {
  const v = Number(raw);
  if (raw === "" || Number.isNaN(v)) {
    throw new SchemaError(`${path}:${line}: column '${column}' is not numeric: '${raw}'`);
  }
  return v;
}

export function parseTraceCsv(path: string): TraceRow[] {
  const lines = readFileSync(path, "utf8").trim().split("\n");
  if (lines.length === 0 || lines[0] === "") {
    throw new SchemaError(`${path}: empty trace file`);
  }
  checkHeader(path, lines[0], TRACE_COLUMNS);
  const rows: TraceRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const c = lines[i].split(",");
    if (c.length !== TRACE_COLUMNS.length) {
      throw new SchemaError(`${path}:${i + 1}: expected ${TRACE_COLUMNS.length} fields, found ${c.length}`);
    }
    rows.push({
      iter: num(path, i + 1, "iter", c[0]),
      f: num(path, i + 1, "f", c[1]),
      gradDualNorm: num(path, i + 1, "grad_dual_norm", c[2]),
      gamma: num(path, i + 1, "gamma", c[3]),
      backtracks: num(path, i + 1, "backtracks", c[4]),
      stepNorm: num(path, i + 1, "step_norm", c[5]),
      oracleCalls: num(path, i + 1, "oracle_calls", c[6]),
      wallSeconds: num(path, i + 1, "wall_seconds", c[7]),
      accepted: c[8] === "true",
    });
  }
  return rows;
}

/** Load the sibling `<stem>.json` run summary of a trace file, if present. */
export function loadSummaryFor(tracePath: string): RunSummary | undefined {
  const jsonPath = tracePath.replace(/\.csv$/, ".json");
  try {
    return JSON.parse(readFileSync(jsonPath, "utf8")) as RunSummary;
  } catch {
    return undefined;
  }
}

export function parseFailureMapCsv(path: string): FailureCell[] {
  const lines = readFileSync(path, "utf8").trim().split("\n");
  if (lines.length === 0 || lines[0] === "") {
    throw new SchemaError(`${path}: empty failure-map file`);
  }
  checkHeader(path, lines[0], FAILURE_MAP_COLUMNS);
  const cells: FailureCell[] = [];
  for (let i = 1; i < lines.length; i++) {
    const c = lines[i].split(",");
    if (c.length !== FAILURE_MAP_COLUMNS.length) {
      throw new SchemaError(`${path}:${i + 1}: expected ${FAILURE_MAP_COLUMNS.length} fields, found ${c.length}`);
    }
    cells.push({
      x1: num(path, i + 1, "x1", c[0]),
      x2: num(path, i + 1, "x2", c[1]),
      status: c[2],
      iters: num(path, i + 1, "iters", c[3]),
      finalF: num(path, i + 1, "final_f", c[4]),
    });
  }
  return cells;
}
