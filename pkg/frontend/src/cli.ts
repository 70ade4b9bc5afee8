#!/usr/bin/env node
/**
 * render_figures <run_dir> --figure <name> [--rate g:t0:t1 ...] [--out <dir>]
 *
 * Renders one of the benchmark figure layouts from a completed run directory
 * (series.csv plus optional snapshot files) into an SVG file.
 */

import { EmptyRunError, FIGURE_NAMES, FigureName, MissingColumnError, ReferenceRate, render } from "./figures";

function usage(): string {
  return (
    "usage: render_figures <run_dir> --figure <name> [--rate g:t0:t1 ...] [--out <dir>]\n" +
    `figures: ${FIGURE_NAMES.join(", ")}\n` +
    "--rate overlays exp(g*t) reference lines (repeatable), e.g. --rate 0.2492:5:15"
  );
}

function parseRate(text: string): ReferenceRate {
  const parts = text.split(":").map(Number);
  if (parts.length !== 3 || parts.some((p) => !Number.isFinite(p))) {
    throw new Error(`bad --rate '${text}': expected g:t0:t1 with numbers`);
  }
  return { rate: parts[0], t0: parts[1], t1: parts[2] };
}

export function main(argv: string[]): number {
  const args = [...argv];
  let runDir: string | undefined;
  let figure: string | undefined;
  let outDir: string | undefined;
  const rates: ReferenceRate[] = [];

  try {
    while (args.length > 0) {
      const arg = args.shift() as string;
      if (arg === "--figure") {
        figure = args.shift();
      } else if (arg === "--rate") {
        rates.push(parseRate(args.shift() ?? ""));
      } else if (arg === "--out") {
        outDir = args.shift();
      } else if (arg === "--help" || arg === "-h") {
        console.log(usage());
        return 0;
      } else if (!runDir) {
        runDir = arg;
      } else {
        throw new Error(`unexpected argument '${arg}'`);
      }
    }
    if (!runDir || !figure) {
      throw new Error("run_dir and --figure are required");
    }
    if (!(FIGURE_NAMES as readonly string[]).includes(figure)) {
      throw new Error(`unknown figure '${figure}'; choose one of ${FIGURE_NAMES.join(", ")}`);
    }
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    console.error(usage());
    return 1;
  }

  try {
    const path = render({
      runDir,
      figure: figure as FigureName,
      referenceRates: rates,
      outDir,
    });
    console.log(path);
    return 0;
  } catch (err) {
    if (err instanceof MissingColumnError || err instanceof EmptyRunError) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
