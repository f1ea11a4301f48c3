/**
 * Minimal deterministic SVG chart builder (no timestamps, no randomness, so
 * re-rendering the same model yields identical bytes).
 *
 * Rendered elements carry class/data attributes (`series`, `bar`, `dot`)
 * so structural tests can count them.
 */

import { BarSeries, DetectionFigure, FigureModel, LineFigure, Series } from "./figures";

const W = 720;
const H = 300;
const ML = 56;
const MR = 16;
const MT = 34;
const MB = 44;
const PW = W - ML - MR;
const PH = H - MT - MB;

const PALETTE = [
  "#4361ee",
  "#e63946",
  "#2d6a4f",
  "#f77f00",
  "#7209b7",
  "#0096c7",
  "#d62828",
  "#588157",
  "#b5179e",
  "#6c757d",
];

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

function niceTicks(min: number, max: number, count: number): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((n) => n >= rough) ?? rough;
  const start = Math.ceil(min / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= max + step * 1e-9; v += step) {
    ticks.push(Number(v.toFixed(10)));
  }
  return ticks;
}

interface Extent {
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
}

function lineExtent(series: Series[]): Extent {
  const xs = series.flatMap((s) => s.points.map((p) => p.round));
  const ys = series.flatMap((s) => s.points.map((p) => p.value));
  return {
    xMin: Math.min(...xs),
    xMax: Math.max(...xs),
    yMin: Math.min(0, ...ys),
    yMax: Math.max(...ys) * 1.08 || 1,
  };
}

function detectionExtent(series: BarSeries[]): Extent {
  const xs = series.flatMap((s) => s.dots.map((p) => p.round));
  const barEnds = series.flatMap((s) => s.bars.map((b) => b.endRound));
  return {
    xMin: Math.min(...xs, 0),
    xMax: Math.max(...xs, ...barEnds),
    yMin: 0,
    yMax: 1.05,
  };
}

function frame(title: string, yLabel: string, ext: Extent): string[] {
  const xOf = (v: number) => ML + ((v - ext.xMin) / (ext.xMax - ext.xMin || 1)) * PW;
  const yOf = (v: number) => MT + PH - ((v - ext.yMin) / (ext.yMax - ext.yMin || 1)) * PH;
  const parts: string[] = [];
  parts.push(`<text x="${ML}" y="${MT - 14}" font-size="11" font-weight="600" fill="#222">${esc(title)}</text>`);
  for (const v of niceTicks(ext.yMin, ext.yMax, 5)) {
    const y = yOf(v).toFixed(1);
    parts.push(`<line x1="${ML}" y1="${y}" x2="${ML + PW}" y2="${y}" stroke="#eee" stroke-width="0.6"/>`);
    parts.push(`<text x="${ML - 5}" y="${(yOf(v) + 3).toFixed(1)}" text-anchor="end" font-size="7.5" fill="#555">${esc(String(v))}</text>`);
  }
  for (const v of niceTicks(ext.xMin, ext.xMax, 8)) {
    const x = xOf(v).toFixed(1);
    parts.push(`<line x1="${x}" y1="${MT + PH}" x2="${x}" y2="${MT + PH + 3}" stroke="#333" stroke-width="0.5"/>`);
    parts.push(`<text x="${x}" y="${MT + PH + 13}" text-anchor="middle" font-size="7.5" fill="#555">${esc(String(v))}</text>`);
  }
  parts.push(`<line x1="${ML}" y1="${MT}" x2="${ML}" y2="${MT + PH}" stroke="#333" stroke-width="0.8"/>`);
  parts.push(`<line x1="${ML}" y1="${MT + PH}" x2="${ML + PW}" y2="${MT + PH}" stroke="#333" stroke-width="0.8"/>`);
  parts.push(`<text x="${ML + PW / 2}" y="${H - 6}" text-anchor="middle" font-size="9" fill="#444">round</text>`);
  parts.push(`<text x="14" y="${MT + PH / 2}" text-anchor="middle" font-size="9" fill="#444" transform="rotate(-90,14,${MT + PH / 2})">${esc(yLabel)}</text>`);
  return parts;
}

function legend(labels: string[]): string[] {
  const parts: string[] = [];
  const lw = Math.max(...labels.map((l) => l.length)) * 5 + 26;
  const x0 = ML + PW - lw;
  parts.push(`<rect x="${x0 - 4}" y="${MT + 2}" width="${lw + 6}" height="${labels.length * 11 + 6}" rx="2" fill="white" fill-opacity="0.85"/>`);
  labels.forEach((label, i) => {
    const y = MT + 10 + i * 11;
    const color = PALETTE[i % PALETTE.length];
    parts.push(`<line x1="${x0}" y1="${y}" x2="${x0 + 14}" y2="${y}" stroke="${color}" stroke-width="2"/>`);
    parts.push(`<text x="${x0 + 18}" y="${y + 3}" font-size="7.5" fill="#333">${esc(label)}</text>`);
  });
  return parts;
}

function renderLine(model: LineFigure, title: string): string {
  const ext = lineExtent(model.series);
  const xOf = (v: number) => ML + ((v - ext.xMin) / (ext.xMax - ext.xMin || 1)) * PW;
  const yOf = (v: number) => MT + PH - ((v - ext.yMin) / (ext.yMax - ext.yMin || 1)) * PH;
  const parts = frame(title, model.yLabel, ext);
  model.series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const pts = s.points.map((p) => `${xOf(p.round).toFixed(1)},${yOf(p.value).toFixed(1)}`).join(" ");
    parts.push(
      `<polyline class="series" data-series="${esc(s.label)}" fill="none" stroke="${color}" stroke-width="1.4" points="${pts}"/>`
    );
  });
  parts.push(...legend(model.series.map((s) => s.label)));
  return parts.join("\n");
}

function renderDetection(model: DetectionFigure, title: string): string {
  const ext = detectionExtent(model.series);
  const xOf = (v: number) => ML + ((v - ext.xMin) / (ext.xMax - ext.xMin || 1)) * PW;
  const yOf = (v: number) => MT + PH - ((v - ext.yMin) / (ext.yMax - ext.yMin || 1)) * PH;
  const parts = frame(title, model.yLabel, ext);
  const n = model.series.length;
  model.series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    for (const bar of s.bars) {
      const x0 = xOf(bar.startRound);
      const x1 = xOf(bar.endRound);
      const width = Math.max((x1 - x0) / n - 2, 2);
      const x = x0 + (i * (x1 - x0)) / n + 1;
      const y = yOf(bar.value);
      parts.push(
        `<rect class="bar" data-series="${esc(s.label)}" data-bucket="${bar.startRound}" ` +
          `x="${x.toFixed(1)}" y="${y.toFixed(1)}" width="${width.toFixed(1)}" ` +
          `height="${(MT + PH - y).toFixed(1)}" fill="${color}" fill-opacity="0.35"/>`
      );
    }
    for (const dot of s.dots) {
      parts.push(
        `<circle class="dot" data-series="${esc(s.label)}" cx="${xOf(dot.round).toFixed(1)}" ` +
          `cy="${yOf(dot.value).toFixed(1)}" r="1.6" fill="${color}"/>`
      );
    }
  });
  parts.push(...legend(model.series.map((s) => s.label)));
  return parts.join("\n");
}

export function renderSvg(model: FigureModel, title?: string): string {
  const heading = title ?? model.figure;
  const body =
    model.kind === "line" ? renderLine(model, heading) : renderDetection(model, heading);
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${W} ${H}" font-family="Helvetica, Arial, sans-serif">`,
    `<rect width="${W}" height="${H}" fill="#fff"/>`,
    body,
    `</svg>`,
    ``,
  ].join("\n");
}
