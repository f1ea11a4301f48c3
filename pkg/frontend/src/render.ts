/** Figure pipeline: read metrics CSVs, build the model, write the SVG. */

import { writeFileSync } from "fs";
import { MetricsRow, readMetricsCsv } from "./csv";
import { buildFigure, FigureModel, FigureSpec } from "./figures";
import { renderSvg } from "./svg";

export function modelFromSpec(spec: FigureSpec): FigureModel {
  const rows: MetricsRow[] = spec.inputs.flatMap((path) => readMetricsCsv(path));
  return buildFigure(spec.kind, rows, spec.groupBy);
}

export function render(spec: FigureSpec): string {
  const model = modelFromSpec(spec);
  const svg = renderSvg(model, spec.title);
  writeFileSync(spec.output, svg);
  return spec.output;
}
