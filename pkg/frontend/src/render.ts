import * as fs from "node:fs";
import * as path from "node:path";

import { renderFigure } from "./figure.js";
import {
  parsePointsCsv,
  parseSweepCsv,
  type Metric,
  type PointRow,
} from "./schema.js";

/** Options accepted by the render entry point. */
export interface RenderOptions {
  metric?: Metric;
  pointsPath?: string;
}

/** Reads a sweep CSV and writes one SVG figure per code into outDir.

    Returns the list of written file paths, sorted by code. */
export function render(
  csvPath: string,
  outDir: string,
  options: RenderOptions = {},
): string[] {
  const curveSets = parseSweepCsv(fs.readFileSync(csvPath, "utf8"));
  const metrics: Metric[] = options.metric ? [options.metric] : ["wer", "ber"];
  let points: PointRow[] = [];
  if (options.pointsPath) {
    points = parsePointsCsv(fs.readFileSync(options.pointsPath, "utf8"));
  }
  fs.mkdirSync(outDir, { recursive: true });
  const written: string[] = [];
  for (const curves of curveSets) {
    const file = path.join(outDir, `${curves.code}.svg`);
    fs.writeFileSync(file, renderFigure(curves, { metrics, points }));
    written.push(file);
  }
  return written;
}
