export {
  MetricsRow,
  NoDataError,
  REQUIRED_COLUMNS,
  SchemaError,
  parseMetricsCsv,
  readMetricsCsv,
} from "./csv";
export {
  DETECTION_BUCKET,
  FIGURE_KINDS,
  FigureKind,
  FigureModel,
  FigureSpec,
  GroupKey,
  buildFigure,
} from "./figures";
export { render, modelFromSpec } from "./render";
export { renderSvg } from "./svg";
