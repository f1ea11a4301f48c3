/**
 * Figure models: group metrics rows into per-series data for the four
 * standard figure kinds. Null metric cells are dropped here, so nothing
 * downstream can mistake "undefined" for zero.
 */

import { MetricsRow } from "./csv";

export const FIGURE_KINDS = ["entropy", "survivors", "detection", "accuracy"] as const;
export type FigureKind = (typeof FIGURE_KINDS)[number];

export type GroupKey = "strategy" | "alpha_band" | "run_id" | "seed";

export interface FigureSpec {
  kind: FigureKind;
  inputs: string[];
  output: string;
  groupBy?: GroupKey;
  title?: string;
}

export interface SeriesPoint {
  round: number;
  value: number;
}

export interface Series {
  label: string;
  points: SeriesPoint[];
}

export interface BarBucket {
  startRound: number; // inclusive
  endRound: number; // inclusive
  value: number;
}

export interface BarSeries {
  label: string;
  bars: BarBucket[];
  dots: SeriesPoint[];
}

export interface LineFigure {
  kind: "line";
  figure: FigureKind;
  yLabel: string;
  series: Series[];
}

export interface DetectionFigure {
  kind: "bars+dots";
  figure: FigureKind;
  yLabel: string;
  series: BarSeries[];
}

export type FigureModel = LineFigure | DetectionFigure;

export const DEFAULT_GROUP_BY: Record<FigureKind, GroupKey> = {
  entropy: "strategy",
  survivors: "run_id",
  detection: "strategy",
  accuracy: "run_id",
};

const VALUE_FIELD: Record<FigureKind, (row: MetricsRow) => number | null> = {
  entropy: (r) => r.entropy,
  survivors: (r) => r.true_malicious_active,
  detection: (r) => r.detection_success_rate,
  accuracy: (r) => r.feed_accuracy,
};

const Y_LABEL: Record<FigureKind, string> = {
  entropy: "deviation entropy (bits)",
  survivors: "surviving malicious nodes",
  detection: "detection success rate",
  accuracy: "feed accuracy",
};

export const DETECTION_BUCKET = 10;

function groupRows(
  rows: MetricsRow[],
  key: GroupKey
): Map<string, MetricsRow[]> {
  const groups = new Map<string, MetricsRow[]>();
  for (const row of rows) {
    const label = String(row[key]);
    const bucket = groups.get(label);
    if (bucket) {
      bucket.push(row);
    } else {
      groups.set(label, [row]);
    }
  }
  return groups;
}

/** Mean of defined values per round within one group (seeds averaged). */
function roundMeans(
  rows: MetricsRow[],
  value: (row: MetricsRow) => number | null
): SeriesPoint[] {
  const byRound = new Map<number, number[]>();
  for (const row of rows) {
    const v = value(row);
    if (v === null) continue; // undefined metric: skipped, not zero
    const list = byRound.get(row.round);
    if (list) {
      list.push(v);
    } else {
      byRound.set(row.round, [v]);
    }
  }
  return [...byRound.entries()]
    .sort((a, b) => a[0] - b[0])
    .map(([round, vs]) => ({
      round,
      value: vs.reduce((s, v) => s + v, 0) / vs.length,
    }));
}

export function buildFigure(
  kind: FigureKind,
  rows: MetricsRow[],
  groupBy?: GroupKey
): FigureModel {
  const key = groupBy ?? DEFAULT_GROUP_BY[kind];
  const value = VALUE_FIELD[kind];
  const groups = [...groupRows(rows, key).entries()].sort((a, b) =>
    a[0].localeCompare(b[0])
  );

  if (kind !== "detection") {
    const series: Series[] = groups.map(([label, groupRows]) => ({
      label,
      points: roundMeans(groupRows, value),
    }));
    return { kind: "line", figure: kind, yLabel: Y_LABEL[kind], series };
  }

  const series: BarSeries[] = groups.map(([label, groupRows]) => {
    const dots = roundMeans(groupRows, value);
    const bars: BarBucket[] = [];
    const maxRound = Math.max(...groupRows.map((r) => r.round));
    for (let start = 0; start <= maxRound; start += DETECTION_BUCKET) {
      const end = Math.min(start + DETECTION_BUCKET - 1, maxRound);
      const inBucket = dots.filter((p) => p.round >= start && p.round <= end);
      if (inBucket.length === 0) continue; // whole bucket undefined
      bars.push({
        startRound: start,
        endRound: end,
        value: inBucket.reduce((s, p) => s + p.value, 0) / inBucket.length,
      });
    }
    return { label, bars, dots };
  });
  return { kind: "bars+dots", figure: kind, yLabel: Y_LABEL[kind], series };
}
