export {
  CsvError,
  numberColumn,
  parseCsv,
  positiveColumn,
  requireSchema,
  stringColumn,
  type Table,
} from "./csv.js";
export {
  computeGuideLine,
  FIGURE_KINDS,
  render,
  renderFigure,
  type FigureKind,
  type FigureSpec,
  type NamedCsv,
} from "./figures.js";
export {
  color,
  linearScale,
  linearTicks,
  logTickLabel,
  logTicks,
  PALETTE,
  tickLabel,
} from "./svg.js";
export { EXIT_DATA, EXIT_OK, EXIT_USAGE, main } from "./cli.js";
