/**
 * Readers for the run-directory file formats: `series.csv` (one diagnostics
 * row per recorded step, 17 numeric columns) and `snapshot_<t>.csv` particle
 * files (`# t = <value>` header line followed by `x,v,w` rows).
 */

import { readFileSync, readdirSync } from "fs";
import { join } from "path";

/** Column-oriented view of a series file. */
export interface SeriesData {
  columns: string[];
  /** column name -> values, one entry per recorded step */
  data: Record<string, number[]>;
  length: number;
}

/** One particle snapshot. */
export interface SnapshotData {
  t: number;
  x: number[];
  v: number[];
  w: number[];
}

export class MissingColumnError extends Error {
  constructor(column: string) {
    super(`series.csv is missing required column '${column}'`);
    this.name = "MissingColumn";
  }
}

export class EmptyRunError extends Error {
  constructor(detail: string) {
    super(`run directory holds no usable data: ${detail}`);
    this.name = "EmptyRun";
  }
}

export function parseSeries(text: string): SeriesData {
  const lines = text.split("\n").filter((line) => line.trim().length > 0);
  if (lines.length === 0) {
    throw new EmptyRunError("series.csv is empty");
  }
  const columns = lines[0].split(",").map((c) => c.trim());
  const data: Record<string, number[]> = {};
  for (const c of columns) {
    data[c] = [];
  }
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== columns.length) {
      throw new Error(`series.csv row ${i + 1}: expected ${columns.length} fields, got ${parts.length}`);
    }
    for (let j = 0; j < columns.length; j++) {
      const value = Number(parts[j]);
      if (!Number.isFinite(value)) {
        throw new Error(`series.csv row ${i + 1}, column '${columns[j]}': not a number: '${parts[j]}'`);
      }
      data[columns[j]].push(value);
    }
  }
  return { columns, data, length: lines.length - 1 };
}

export function parseSnapshot(text: string): SnapshotData {
  const lines = text.split("\n").filter((line) => line.trim().length > 0);
  if (lines.length < 2 || !lines[0].startsWith("# t =")) {
    throw new Error("snapshot file must start with '# t = <value>' and a column header");
  }
  const t = Number(lines[0].split("=")[1]);
  const x: number[] = [];
  const v: number[] = [];
  const w: number[] = [];
  for (let i = 2; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== 3) {
      throw new Error(`snapshot row ${i + 1}: expected x,v,w`);
    }
    x.push(Number(parts[0]));
    v.push(Number(parts[1]));
    w.push(Number(parts[2]));
  }
  return { t, x, v, w };
}

export function readSeries(runDir: string): SeriesData {
  let text: string;
  try {
    text = readFileSync(join(runDir, "series.csv"), "utf8");
  } catch (err) {
    throw new EmptyRunError(`cannot read ${join(runDir, "series.csv")}`);
  }
  const series = parseSeries(text);
  if (series.length === 0) {
    throw new EmptyRunError("series.csv has a header but no rows");
  }
  return series;
}

/** Snapshot files in the run directory, sorted by their recorded time. */
export function readSnapshots(runDir: string): SnapshotData[] {
  const names = readdirSync(runDir).filter(
    (name) => name.startsWith("snapshot_") && name.endsWith(".csv"),
  );
  const snaps = names.map((name) => parseSnapshot(readFileSync(join(runDir, name), "utf8")));
  snaps.sort((a, b) => a.t - b.t);
  return snaps;
}

export function requireColumns(series: SeriesData, needed: string[]): void {
  for (const column of needed) {
    if (!(column in series.data)) {
      throw new MissingColumnError(column);
    }
  }
}
