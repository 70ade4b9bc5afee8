/**
 * Dependency-free SVG chart building: linear/log scales, tick generation,
 * line plots, reference-line overlays and weighted 2D heatmaps, composed
 * into multi-panel figures.
 */

export type ScaleKind = "linear" | "log";

export interface Scale {
  kind: ScaleKind;
  domain: [number, number];
  range: [number, number];
  pos(value: number): number;
  ticks(): number[];
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

/** Heat colormap stops, dark to bright (approximates viridis). */
const HEAT_STOPS: Array<[number, [number, number, number]]> = [
  [0.0, [68, 1, 84]],
  [0.25, [59, 82, 139]],
  [0.5, [33, 145, 140]],
  [0.75, [94, 201, 98]],
  [1.0, [253, 231, 37]],
];

export function heatColor(fraction: number): string {
  const f = Math.min(1, Math.max(0, fraction));
  for (let i = 1; i < HEAT_STOPS.length; i++) {
    const [f1, c1] = HEAT_STOPS[i];
    const [f0, c0] = HEAT_STOPS[i - 1];
    if (f <= f1) {
      const s = (f - f0) / (f1 - f0);
      const rgb = c0.map((c, k) => Math.round(c + s * (c1[k] - c)));
      return `rgb(${rgb[0]},${rgb[1]},${rgb[2]})`;
    }
  }
  return "rgb(253,231,37)";
}

function niceStep(span: number, target: number): number {
  const raw = span / Math.max(target, 1);
  const power = Math.pow(10, Math.floor(Math.log10(raw)));
  for (const mult of [1, 2, 5, 10]) {
    if (mult * power >= raw) {
      return mult * power;
    }
  }
  return 10 * power;
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  let [d0, d1] = domain;
  if (d0 === d1) {
    d0 -= 1;
    d1 += 1;
  }
  const pos = (value: number) => range[0] + ((value - d0) / (d1 - d0)) * (range[1] - range[0]);
  return {
    kind: "linear",
    domain: [d0, d1],
    range,
    pos,
    ticks() {
      const step = niceStep(d1 - d0, 5);
      const first = Math.ceil(d0 / step) * step;
      const out: number[] = [];
      for (let v = first; v <= d1 + 1e-12 * Math.abs(d1 - d0); v += step) {
        out.push(Math.abs(v) < 1e-12 * step ? 0 : v);
      }
      return out;
    },
  };
}

export function logScale(domain: [number, number], range: [number, number]): Scale {
  let [d0, d1] = domain;
  if (!(d0 > 0) || !(d1 > 0)) {
    throw new Error("log scale requires a positive domain");
  }
  if (d0 === d1) {
    d0 /= 10;
    d1 *= 10;
  }
  const l0 = Math.log10(d0);
  const l1 = Math.log10(d1);
  const pos = (value: number) =>
    range[0] + ((Math.log10(value) - l0) / (l1 - l0)) * (range[1] - range[0]);
  return {
    kind: "log",
    domain: [d0, d1],
    range,
    pos,
    ticks() {
      const out: number[] = [];
      const span = Math.ceil(l1) - Math.floor(l0);
      const every = Math.max(1, Math.ceil(span / 8));
      for (let e = Math.ceil(l0); e <= Math.floor(l1) + 1e-9; e += every) {
        out.push(Math.pow(10, e));
      }
      return out;
    },
  };
}

export function formatTick(value: number): string {
  if (value === 0) {
    return "0";
  }
  const magnitude = Math.abs(value);
  if (magnitude >= 1e4 || magnitude < 1e-3) {
    return value.toExponential(0).replace("+", "");
  }
  return parseFloat(value.toPrecision(6)).toString();
}

export interface LineSeries {
  x: number[];
  y: number[];
  label?: string;
  color?: string;
  dashed?: boolean;
}

export interface Panel {
  title: string;
  xLabel: string;
  yLabel: string;
  yScale?: ScaleKind;
  series: LineSeries[];
  /** Optional weighted 2D histogram drawn behind the axes. */
  heatmap?: HeatmapData;
}

export interface HeatmapData {
  counts: number[][]; // [ix][iv]
  xEdges: number[];
  yEdges: number[];
}

/** Weighted 2D histogram over fixed ranges (used for phase-space contours). */
export function histogram2d(
  x: number[],
  y: number[],
  w: number[],
  xBins: number,
  yBins: number,
  xRange: [number, number],
  yRange: [number, number],
): HeatmapData {
  const counts: number[][] = Array.from({ length: xBins }, () => new Array(yBins).fill(0));
  const dx = (xRange[1] - xRange[0]) / xBins;
  const dy = (yRange[1] - yRange[0]) / yBins;
  for (let k = 0; k < x.length; k++) {
    const i = Math.floor((x[k] - xRange[0]) / dx);
    const j = Math.floor((y[k] - yRange[0]) / dy);
    if (i >= 0 && i < xBins && j >= 0 && j < yBins) {
      counts[i][j] += w[k];
    }
  }
  const xEdges = Array.from({ length: xBins + 1 }, (_, i) => xRange[0] + i * dx);
  const yEdges = Array.from({ length: yBins + 1 }, (_, j) => yRange[0] + j * dy);
  return { counts, xEdges, yEdges };
}

const PANEL_W = 430;
const PANEL_H = 330;
const MARGIN = { top: 34, right: 16, bottom: 46, left: 70 };

function escapeXml(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function panelSvg(panel: Panel, x0: number, y0: number): string {
  const innerW = PANEL_W - MARGIN.left - MARGIN.right;
  const innerH = PANEL_H - MARGIN.top - MARGIN.bottom;
  const parts: string[] = [];
  const yScaleKind: ScaleKind = panel.yScale ?? "linear";

  // collect plottable points (log scale drops non-positive values)
  const kept = panel.series.map((s) => {
    const pts: Array<[number, number]> = [];
    for (let i = 0; i < s.x.length; i++) {
      if (yScaleKind === "log" && !(s.y[i] > 0)) {
        continue;
      }
      if (Number.isFinite(s.x[i]) && Number.isFinite(s.y[i])) {
        pts.push([s.x[i], s.y[i]]);
      }
    }
    return pts;
  });

  let xMin = Infinity;
  let xMax = -Infinity;
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const pts of kept) {
    for (const [px, py] of pts) {
      xMin = Math.min(xMin, px);
      xMax = Math.max(xMax, px);
      yMin = Math.min(yMin, py);
      yMax = Math.max(yMax, py);
    }
  }
  if (panel.heatmap) {
    const he = panel.heatmap;
    xMin = Math.min(xMin, he.xEdges[0]);
    xMax = Math.max(xMax, he.xEdges[he.xEdges.length - 1]);
    yMin = Math.min(yMin, he.yEdges[0]);
    yMax = Math.max(yMax, he.yEdges[he.yEdges.length - 1]);
  }
  if (!Number.isFinite(xMin)) {
    xMin = 0;
    xMax = 1;
    yMin = yScaleKind === "log" ? 0.1 : 0;
    yMax = 1;
  }

  const sx = linearScale([xMin, xMax], [x0 + MARGIN.left, x0 + MARGIN.left + innerW]);
  const sy =
    yScaleKind === "log"
      ? logScale([yMin, yMax], [y0 + MARGIN.top + innerH, y0 + MARGIN.top])
      : linearScale([yMin, yMax], [y0 + MARGIN.top + innerH, y0 + MARGIN.top]);

  // heatmap cells first so curves draw on top
  if (panel.heatmap) {
    const { counts, xEdges, yEdges } = panel.heatmap;
    let peak = 0;
    for (const row of counts) {
      for (const c of row) {
        peak = Math.max(peak, c);
      }
    }
    for (let i = 0; i < counts.length; i++) {
      for (let j = 0; j < counts[i].length; j++) {
        if (counts[i][j] <= 0) {
          continue;
        }
        const rx = sx.pos(xEdges[i]);
        const ry = sy.pos(yEdges[j + 1]);
        const rw = sx.pos(xEdges[i + 1]) - rx;
        const rh = sy.pos(yEdges[j]) - ry;
        parts.push(
          `<rect x="${rx.toFixed(2)}" y="${ry.toFixed(2)}" width="${rw.toFixed(2)}" ` +
            `height="${rh.toFixed(2)}" fill="${heatColor(counts[i][j] / peak)}"/>`,
        );
      }
    }
  }

  // axes
  const axL = x0 + MARGIN.left;
  const axB = y0 + MARGIN.top + innerH;
  parts.push(
    `<rect x="${axL}" y="${y0 + MARGIN.top}" width="${innerW}" height="${innerH}" ` +
      `fill="none" stroke="#444" stroke-width="1"/>`,
  );
  for (const tick of sx.ticks()) {
    const px = sx.pos(tick);
    parts.push(`<line x1="${px}" y1="${axB}" x2="${px}" y2="${axB + 4}" stroke="#444"/>`);
    parts.push(
      `<text x="${px}" y="${axB + 17}" font-size="11" text-anchor="middle">${formatTick(tick)}</text>`,
    );
  }
  for (const tick of sy.ticks()) {
    const py = sy.pos(tick);
    parts.push(`<line x1="${axL - 4}" y1="${py}" x2="${axL}" y2="${py}" stroke="#444"/>`);
    parts.push(
      `<text x="${axL - 7}" y="${py + 4}" font-size="11" text-anchor="end">${formatTick(tick)}</text>`,
    );
  }

  // curves
  panel.series.forEach((s, idx) => {
    const pts = kept[idx];
    if (pts.length === 0) {
      return;
    }
    const color = s.color ?? PALETTE[idx % PALETTE.length];
    const path = pts
      .map(([px, py], i) => `${i === 0 ? "M" : "L"}${sx.pos(px).toFixed(2)},${sy.pos(py).toFixed(2)}`)
      .join("");
    const dash = s.dashed ? ' stroke-dasharray="6,4"' : "";
    const cls = s.dashed ? ' class="overlay"' : "";
    parts.push(
      `<path d="${path}" fill="none" stroke="${color}" stroke-width="1.4"${dash}${cls}/>`,
    );
  });

  // legend for multi-series panels
  const labelled = panel.series.filter((s) => s.label);
  if (labelled.length > 0) {
    labelled.forEach((s, i) => {
      const idx = panel.series.indexOf(s);
      const color = s.color ?? PALETTE[idx % PALETTE.length];
      const ly = y0 + MARGIN.top + 14 + 15 * i;
      const lx = x0 + MARGIN.left + 10;
      parts.push(
        `<line x1="${lx}" y1="${ly - 4}" x2="${lx + 18}" y2="${ly - 4}" stroke="${color}" ` +
          `stroke-width="1.4"${s.dashed ? ' stroke-dasharray="6,4"' : ""}/>`,
      );
      parts.push(`<text x="${lx + 23}" y="${ly}" font-size="11">${escapeXml(s.label ?? "")}</text>`);
    });
  }

  // titles and axis labels
  parts.push(
    `<text x="${x0 + PANEL_W / 2}" y="${y0 + 18}" font-size="13" font-weight="bold" ` +
      `text-anchor="middle">${escapeXml(panel.title)}</text>`,
  );
  parts.push(
    `<text x="${x0 + MARGIN.left + innerW / 2}" y="${y0 + PANEL_H - 10}" font-size="12" ` +
      `text-anchor="middle">${escapeXml(panel.xLabel)}</text>`,
  );
  parts.push(
    `<text x="${x0 + 16}" y="${y0 + MARGIN.top + innerH / 2}" font-size="12" text-anchor="middle" ` +
      `transform="rotate(-90 ${x0 + 16} ${y0 + MARGIN.top + innerH / 2})">${escapeXml(panel.yLabel)}</text>`,
  );
  return parts.join("\n");
}

/** Lay panels out on a grid and return a complete SVG document. */
export function composeFigure(panels: Panel[], columns = 2): string {
  const rows = Math.ceil(panels.length / columns);
  const cols = Math.min(columns, panels.length);
  const width = cols * PANEL_W;
  const height = rows * PANEL_H;
  const body = panels
    .map((panel, i) => panelSvg(panel, (i % columns) * PANEL_W, Math.floor(i / columns) * PANEL_H))
    .join("\n");
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">\n` +
    `<rect width="${width}" height="${height}" fill="white"/>\n${body}\n</svg>\n`
  );
}
