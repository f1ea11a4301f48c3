/**
 * Metrics CSV contract: parsing and validation.
 *
 * The simulator exports one row per round with the fixed column set below.
 * Undefined metrics are empty cells and parse to null — they must be skipped
 * by consumers, never treated as zero.
 */

import { readFileSync } from "fs";

export const REQUIRED_COLUMNS = [
  "run_id",
  "strategy",
  "alpha_band",
  "seed",
  "round",
  "entropy",
  "detection_success_rate",
  "feed_accuracy",
  "true_malicious_active",
  "malicious_detected",
] as const;

export type MetricsColumn = (typeof REQUIRED_COLUMNS)[number];

export interface MetricsRow {
  run_id: string;
  strategy: string;
  alpha_band: string;
  seed: number;
  round: number;
  entropy: number | null;
  detection_success_rate: number | null;
  feed_accuracy: number | null;
  true_malicious_active: number;
  malicious_detected: number;
}

export class SchemaError extends Error {
  constructor(public readonly missing: string[]) {
    super(`metrics CSV missing column(s): ${missing.join(", ")}`);
    this.name = "SchemaError";
  }
}

export class NoDataError extends Error {
  constructor(path: string) {
    super(`no data rows in ${path}`);
    this.name = "NoDataError";
  }
}

function optionalNumber(cell: string): number | null {
  return cell === "" ? null : Number(cell);
}

/** RFC-4180 field split: commas inside double quotes do not separate. */
export function splitCsvLine(line: string): string[] {
  const cells: string[] = [];
  let cell = "";
  let quoted = false;
  for (let i = 0; i < line.length; i++) {
    const ch = line[i];
    if (quoted) {
      if (ch === '"') {
        if (line[i + 1] === '"') {
          cell += '"';
          i++;
        } else {
          quoted = false;
        }
      } else {
        cell += ch;
      }
    } else if (ch === '"') {
      quoted = true;
    } else if (ch === ",") {
      cells.push(cell);
      cell = "";
    } else {
      cell += ch;
    }
  }
  cells.push(cell);
  return cells;
}

export function parseMetricsCsv(text: string, path = "<memory>"): MetricsRow[] {
  const lines = text.split("\n").filter((line) => line.trim() !== "");
  if (lines.length === 0) {
    throw new NoDataError(path);
  }
  const header = splitCsvLine(lines[0]).map((h) => h.trim());
  const missing = REQUIRED_COLUMNS.filter((c) => !header.includes(c));
  if (missing.length > 0) {
    throw new SchemaError(missing);
  }
  const index = new Map(header.map((name, i) => [name, i]));
  const at = (cells: string[], name: MetricsColumn) => cells[index.get(name)!] ?? "";

  const rows: MetricsRow[] = [];
  for (const line of lines.slice(1)) {
    const cells = splitCsvLine(line);
    rows.push({
      run_id: at(cells, "run_id"),
      strategy: at(cells, "strategy"),
      alpha_band: at(cells, "alpha_band"),
      seed: Number(at(cells, "seed")),
      round: Number(at(cells, "round")),
      entropy: optionalNumber(at(cells, "entropy")),
      detection_success_rate: optionalNumber(at(cells, "detection_success_rate")),
      feed_accuracy: optionalNumber(at(cells, "feed_accuracy")),
      true_malicious_active: Number(at(cells, "true_malicious_active")),
      malicious_detected: Number(at(cells, "malicious_detected")),
    });
  }
  if (rows.length === 0) {
    throw new NoDataError(path);
  }
  return rows;
}

export function readMetricsCsv(path: string): MetricsRow[] {
  return parseMetricsCsv(readFileSync(path, "utf-8"), path);
}
