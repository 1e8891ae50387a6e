import type { CurveSet, Metric, PointRow, Series, SweepRow } from "./schema.js";

/** Rendering options shared by every panel of a figure. */
export interface FigureOptions {
  metrics: Metric[];
  points: PointRow[];
}

const PANEL_WIDTH = 340;
const PANEL_HEIGHT = 250;
const MARGIN = { top: 34, right: 18, bottom: 44, left: 62 };
const DEFAULT_FLOOR = 1e-6;

/** Fixed series palette keyed by the sorted position of k. */
export const PALETTE = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

const METRIC_LABEL: Record<Metric, string> = {
  wer: "word error rate",
  ber: "bit error rate",
};

function value(row: SweepRow | PointRow, metric: Metric): number {
  return metric === "wer" ? row.wer : row.ber;
}

function sigma(row: SweepRow | PointRow, metric: Metric): number {
  return metric === "wer" ? row.werSigma : row.berSigma;
}

/** Smallest positive plotted value divided by ten; keeps zero-failure
    estimates visible on the log axis as upper-bound markers. */
export function logFloor(curves: CurveSet, metrics: Metric[]): number {
  let min = Infinity;
  for (const s of curves.series) {
    for (const row of s.rows) {
      for (const metric of metrics) {
        const v = value(row, metric);
        if (v > 0 && v < min) {
          min = v;
        }
      }
    }
  }
  return Number.isFinite(min) ? Math.min(1, min / 10) : DEFAULT_FLOOR;
}

function fmt(x: number): string {
  return Number(x.toFixed(2)).toString();
}

interface Scale {
  (x: number): number;
}

function logScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const a = Math.log10(lo);
  const b = Math.log10(hi);
  return (x) =>
    outLo + ((Math.log10(x) - a) / (b - a)) * (outHi - outLo);
}

function decades(lo: number, hi: number): number[] {
  const out: number[] = [];
  for (let e = Math.ceil(Math.log10(lo)); e <= Math.floor(Math.log10(hi)); e++) {
    out.push(10 ** e);
  }
  return out;
}

function polyline(
  rows: SweepRow[],
  metric: Metric,
  floor: number,
  sx: Scale,
  sy: Scale,
): string {
  return rows
    .map((r) => `${fmt(sx(r.p))},${fmt(sy(Math.max(value(r, metric), floor)))}`)
    .join(" ");
}

function bandPath(
  rows: SweepRow[],
  metric: Metric,
  floor: number,
  sx: Scale,
  sy: Scale,
): string {
  const upper = rows.map(
    (r) =>
      `${fmt(sx(r.p))},${fmt(
        sy(Math.max(Math.min(value(r, metric) + sigma(r, metric), 1), floor)),
      )}`,
  );
  const lower = [...rows].reverse().map(
    (r) =>
      `${fmt(sx(r.p))},${fmt(
        sy(Math.max(value(r, metric) - sigma(r, metric), floor)),
      )}`,
  );
  return `M${upper.join(" L")} L${lower.join(" L")} Z`;
}

interface PanelSpec {
  curves: CurveSet;
  layer: number;
  metric: Metric;
  floor: number;
  x0: number;
  y0: number;
}

function renderPanel(spec: PanelSpec, points: PointRow[]): string {
  const { curves, layer, metric, floor, x0, y0 } = spec;
  const series = curves.series.filter((s) => s.L === layer);
  const ps = series.flatMap((s) => s.rows.map((r) => r.p));
  const pLo = Math.min(...ps) / 1.2;
  const pHi = Math.max(...ps) * 1.2;
  const plotX0 = x0 + MARGIN.left;
  const plotX1 = x0 + PANEL_WIDTH - MARGIN.right;
  const plotY0 = y0 + MARGIN.top;
  const plotY1 = y0 + PANEL_HEIGHT - MARGIN.bottom;
  const sx = logScale(pLo, pHi, plotX0, plotX1);
  const sy = logScale(floor, 1, plotY1, plotY0);
  const parts: string[] = [];
  parts.push(
    `<rect x="${plotX0}" y="${plotY0}" width="${plotX1 - plotX0}" ` +
      `height="${plotY1 - plotY0}" fill="none" stroke="#333"/>`,
  );
  for (const tick of decades(floor, 1)) {
    const y = fmt(sy(tick));
    parts.push(
      `<line x1="${plotX0}" y1="${y}" x2="${plotX1}" y2="${y}" ` +
        `stroke="#ddd" stroke-width="0.5"/>`,
      `<text x="${plotX0 - 6}" y="${y}" text-anchor="end" ` +
        `dominant-baseline="middle" font-size="9">1e${Math.round(
          Math.log10(tick),
        )}</text>`,
    );
  }
  for (const tick of decades(pLo, pHi).concat(ps)) {
    const x = fmt(sx(tick));
    parts.push(
      `<line x1="${x}" y1="${fmt(plotY1)}" x2="${x}" y2="${fmt(plotY1 + 4)}" stroke="#333"/>`,
      `<text x="${x}" y="${fmt(plotY1 + 15)}" text-anchor="middle" font-size="9">${tick}</text>`,
    );
  }
  series.forEach((s) => {
    const color = PALETTE[curves.ks.indexOf(s.k) % PALETTE.length];
    parts.push(
      `<path class="band" d="${bandPath(s.rows, metric, floor, sx, sy)}" ` +
        `fill="${color}" fill-opacity="0.18" stroke="none"/>`,
    );
    parts.push(
      `<polyline class="series" data-l="${s.L}" data-k="${s.k}" ` +
        `data-metric="${metric}" points="${polyline(s.rows, metric, floor, sx, sy)}" ` +
        `fill="none" stroke="${color}" stroke-width="1.5"/>`,
    );
    for (const r of s.rows) {
      const v = value(r, metric);
      const shape =
        v > 0
          ? `<circle cx="${fmt(sx(r.p))}" cy="${fmt(sy(Math.max(v, floor)))}" r="2.5" fill="${color}"/>`
          : `<path d="M${fmt(sx(r.p) - 3)},${fmt(sy(floor))} l3,-5 l3,5 z" ` +
            `fill="none" stroke="${color}"/>`;
      parts.push(shape);
    }
  });
  for (const pt of points) {
    if (pt.code !== curves.code || pt.L !== layer) {
      continue;
    }
    const color = PALETTE[curves.ks.indexOf(pt.k) % PALETTE.length];
    const cx = fmt(sx(pt.p));
    const v = Math.max(value(pt, metric), floor);
    const hi = Math.max(Math.min(value(pt, metric) + sigma(pt, metric), 1), floor);
    const lo = Math.max(value(pt, metric) - sigma(pt, metric), floor);
    parts.push(
      `<line class="point-bar" x1="${cx}" y1="${fmt(sy(lo))}" x2="${cx}" ` +
        `y2="${fmt(sy(hi))}" stroke="${color}"/>`,
      `<rect class="point" x="${fmt(sx(pt.p) - 3)}" y="${fmt(sy(v) - 3)}" ` +
        `width="6" height="6" fill="none" stroke="${color}"/>`,
    );
  }
  parts.push(
    `<text x="${fmt((plotX0 + plotX1) / 2)}" y="${y0 + 16}" text-anchor="middle" ` +
      `font-size="11">${curves.code}  L=${layer}  ${METRIC_LABEL[metric]}</text>`,
    `<text x="${fmt((plotX0 + plotX1) / 2)}" y="${fmt(plotY1 + 30)}" ` +
      `text-anchor="middle" font-size="10">physical error probability</text>`,
  );
  return parts.join("\n");
}

/** Embedded copy of every plotted series, for value spot checks. */
export function seriesData(curves: CurveSet, metrics: Metric[]): object {
  return {
    code: curves.code,
    panels: curves.layers.flatMap((layer) =>
      metrics.map((metric) => ({
        L: layer,
        metric,
        series: curves.series
          .filter((s: Series) => s.L === layer)
          .map((s: Series) => ({
            k: s.k,
            p: s.rows.map((r) => r.p),
            value: s.rows.map((r) => value(r, metric)),
            sigma: s.rows.map((r) => sigma(r, metric)),
          })),
      })),
    ),
  };
}

/** Builds the complete multi-panel SVG figure for one code. */
export function renderFigure(curves: CurveSet, options: FigureOptions): string {
  const { metrics, points } = options;
  const floor = logFloor(curves, metrics);
  const width = PANEL_WIDTH * metrics.length;
  const height = PANEL_HEIGHT * curves.layers.length + 18;
  const panels: string[] = [];
  curves.layers.forEach((layer, row) => {
    metrics.forEach((metric, col) => {
      panels.push(
        renderPanel(
          {
            curves, layer, metric, floor,
            x0: col * PANEL_WIDTH,
            y0: row * PANEL_HEIGHT,
          },
          points,
        ),
      );
    });
  });
  const legend = curves.ks
    .map(
      (k, i) =>
        `<text x="${10 + 70 * i}" y="${height - 6}" font-size="10" ` +
        `fill="${PALETTE[i % PALETTE.length]}">k=${k}</text>`,
    )
    .join("");
  const embedded = JSON.stringify(seriesData(curves, metrics));
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="sans-serif">`,
    `<metadata id="series-data">${embedded}</metadata>`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    ...panels,
    legend,
    "</svg>",
  ].join("\n");
}
