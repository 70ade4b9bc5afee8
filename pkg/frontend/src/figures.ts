/**
 * Figure assembly: map a run directory onto the benchmark panel layouts and
 * write one SVG per figure.
 */

import { mkdirSync, writeFileSync } from "fs";
import { join } from "path";

import {
  EmptyRunError,
  MissingColumnError,
  readSeries,
  readSnapshots,
  requireColumns,
  SeriesData,
  SnapshotData,
} from "./csv";
import { composeFigure, histogram2d, LineSeries, Panel } from "./chart";

export const FIGURE_NAMES = [
  "finite_grid_panels",
  "landau_panels",
  "two_stream_panels",
  "phase_contour",
] as const;

export type FigureName = (typeof FIGURE_NAMES)[number];

/** A reference exponential exp(rate * t) drawn over [t0, t1]. */
export interface ReferenceRate {
  rate: number;
  t0: number;
  t1: number;
}

export interface FigureSpec {
  runDir: string;
  figure: FigureName;
  referenceRates?: ReferenceRate[];
  /** Output directory; defaults to the run directory. */
  outDir?: string;
}

function absSeries(series: SeriesData, column: string): LineSeries {
  return { x: series.data.t, y: series.data[column].map(Math.abs) };
}

/** Overlay lines anchored on the data value at each window start. */
function overlaySeries(
  series: SeriesData,
  column: string,
  rates: ReferenceRate[],
): LineSeries[] {
  const t = series.data.t;
  const y = series.data[column];
  return rates.map(({ rate, t0, t1 }) => {
    let anchorIdx = 0;
    for (let i = 0; i < t.length; i++) {
      if (t[i] <= t0) {
        anchorIdx = i;
      }
    }
    const anchor = Math.abs(y[anchorIdx]) > 0 ? Math.abs(y[anchorIdx]) : 1e-16;
    const n = 60;
    const xs: number[] = [];
    const ys: number[] = [];
    for (let i = 0; i <= n; i++) {
      const tt = t0 + ((t1 - t0) * i) / n;
      xs.push(tt);
      ys.push(anchor * Math.exp(rate * (tt - t[anchorIdx])));
    }
    return {
      x: xs,
      y: ys,
      dashed: true,
      color: "#222",
      label: `rate ${rate.toPrecision(4)}`,
    };
  });
}

function contourPanel(snapshot: SnapshotData, title: string): Panel {
  const xMax = Math.max(...snapshot.x);
  const vAbs = Math.max(...snapshot.v.map(Math.abs));
  const heatmap = histogram2d(
    snapshot.x,
    snapshot.v,
    snapshot.w,
    72,
    72,
    [0, xMax],
    [-1.05 * vAbs, 1.05 * vAbs],
  );
  return {
    title,
    xLabel: "x",
    yLabel: "v",
    series: [],
    heatmap,
  };
}

function placeholderPanel(title: string, note: string): Panel {
  return {
    title: `${title} (${note})`,
    xLabel: "",
    yLabel: "",
    series: [],
  };
}

function energyErrorPanel(series: SeriesData): Panel {
  return {
    title: "Total energy error",
    xLabel: "t",
    yLabel: "|H(t) - H(0)| / |H(0)|",
    yScale: "log",
    series: [absSeries(series, "H_err_rel")],
  };
}

function neutralityPanel(series: SeriesData): Panel {
  return {
    title: "Neutrality error",
    xLabel: "t",
    yLabel: "|charge imbalance|",
    yScale: "log",
    series: [absSeries(series, "neutrality_err")],
  };
}

function buildPanels(
  figure: FigureName,
  series: SeriesData,
  snapshots: SnapshotData[],
  rates: ReferenceRate[],
): Panel[] {
  const latest = snapshots.length > 0 ? snapshots[snapshots.length - 1] : undefined;
  switch (figure) {
    case "finite_grid_panels": {
      requireColumns(series, ["t", "H_err_rel", "temperature", "momentum_err"]);
      return [
        energyErrorPanel(series),
        {
          title: "Ion temperature",
          xLabel: "t",
          yLabel: "T",
          series: [{ x: series.data.t, y: series.data.temperature }],
        },
        {
          title: "Momentum error",
          xLabel: "t",
          yLabel: "|P(t) - P(0)|",
          yScale: "log",
          series: [absSeries(series, "momentum_err")],
        },
        latest
          ? contourPanel(latest, `Phase space at t = ${latest.t}`)
          : placeholderPanel("Phase space", "no snapshot in run directory"),
      ];
    }
    case "landau_panels": {
      requireColumns(series, ["t", "H_err_rel", "neutrality_err", "electric", "kinetic"]);
      return [
        energyErrorPanel(series),
        neutralityPanel(series),
        {
          title: "Electric energy",
          xLabel: "t",
          yLabel: "electric energy",
          yScale: "log",
          series: [absSeries(series, "electric"), ...overlaySeries(series, "electric", rates)],
        },
        {
          title: "Kinetic energy",
          xLabel: "t",
          yLabel: "kinetic energy",
          series: [{ x: series.data.t, y: series.data.kinetic }],
        },
      ];
    }
    case "two_stream_panels": {
      requireColumns(series, ["t", "H_err_rel", "neutrality_err", "mode2"]);
      return [
        energyErrorPanel(series),
        neutralityPanel(series),
        {
          title: "Second Fourier mode of phi",
          xLabel: "t",
          yLabel: "mode-2 amplitude",
          yScale: "log",
          series: [absSeries(series, "mode2"), ...overlaySeries(series, "mode2", rates)],
        },
        latest
          ? contourPanel(latest, `Phase space at t = ${latest.t}`)
          : placeholderPanel("Phase space", "no snapshot in run directory"),
      ];
    }
    case "phase_contour": {
      if (!latest) {
        throw new EmptyRunError("phase_contour needs at least one snapshot file");
      }
      return [contourPanel(latest, `Phase space at t = ${latest.t}`)];
    }
  }
}

/** Render one figure; returns the path of the SVG written. */
export function render(spec: FigureSpec): string {
  const series = readSeries(spec.runDir);
  const snapshots = readSnapshots(spec.runDir);
  const panels = buildPanels(spec.figure, series, snapshots, spec.referenceRates ?? []);
  const svg = composeFigure(panels, 2);
  const outDir = spec.outDir ?? spec.runDir;
  mkdirSync(outDir, { recursive: true });
  const outPath = join(outDir, `${spec.figure}.svg`);
  writeFileSync(outPath, svg);
  return outPath;
}

export { EmptyRunError, MissingColumnError };
