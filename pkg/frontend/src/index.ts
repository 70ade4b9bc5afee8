export {
  EmptyRunError,
  MissingColumnError,
  parseSeries,
  parseSnapshot,
  readSeries,
  readSnapshots,
  requireColumns,
} from "./csv";
export type { SeriesData, SnapshotData } from "./csv";
export { composeFigure, heatColor, histogram2d, linearScale, logScale, formatTick } from "./chart";
export type { HeatmapData, LineSeries, Panel, Scale } from "./chart";
export { FIGURE_NAMES, render } from "./figures";
export type { FigureName, FigureSpec, ReferenceRate } from "./figures";
