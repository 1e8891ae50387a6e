import Papa from "papaparse";
import { z } from "zod";

/** One parsed sweep row: a (code, L, k) series value at one probability. */
export interface SweepRow {
  code: string;
  L: number;
  k: number;
  p: number;
  wer: number;
  werSigma: number;
  ber: number;
  berSigma: number;
  nQubits: number;
  jMax: number;
  seed: number;
}

/** Optional direct-sampling overlay point (error-bar markers). */
export interface PointRow {
  code: string;
  L: number;
  k: number;
  p: number;
  wer: number;
  werSigma: number;
  ber: number;
  berSigma: number;
}

export type Metric = "wer" | "ber";

/** Rows of one (code, L, k) series, sorted by probability. */
export interface Series {
  L: number;
  k: number;
  rows: SweepRow[];
}

/** All series of one code, the unit rendered into a single figure. */
export interface CurveSet {
  code: string;
  layers: number[];
  ks: number[];
  series: Series[];
}

const SWEEP_COLUMNS = [
  "code", "L", "k", "p", "wer", "wer_sigma", "ber", "ber_sigma",
  "n_qubits", "j_max", "seed",
] as const;

const POINT_COLUMNS = [
  "code", "L", "k", "p", "wer", "wer_sigma", "ber", "ber_sigma",
] as const;

const numeric = z.coerce.number().finite();
const probability = numeric.min(0).max(1);

const sweepRowSchema = z.object({
  code: z.string().min(1),
  L: numeric.int().min(1),
  k: numeric.int().min(1),
  p: probability.gt(0),
  wer: probability,
  wer_sigma: numeric.min(0),
  ber: probability,
  ber_sigma: numeric.min(0),
  n_qubits: numeric.int().min(1),
  j_max: numeric.int().min(0),
  seed: numeric.int(),
});

const pointRowSchema = sweepRowSchema.pick({
  code: true, L: true, k: true, p: true,
  wer: true, wer_sigma: true, ber: true, ber_sigma: true,
});

/** Raised on malformed input with a per-column diagnostic message. */
export class SchemaError extends Error {}

function checkHeader(
  fields: string[] | undefined,
  required: readonly string[],
  label: string,
): void {
  const present = new Set(fields ?? []);
  const missing = required.filter((c) => !present.has(c));
  if (missing.length > 0) {
    throw new SchemaError(
      `${label}: missing column(s) ${missing.join(", ")}; ` +
        `expected header ${required.join(",")}`,
    );
  }
}

function parseRows<T>(
  text: string,
  required: readonly string[],
  schema: z.ZodType<T>,
  label: string,
): T[] {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new SchemaError(`${label}: row ${e.row}: ${e.message}`);
  }
  checkHeader(parsed.meta.fields, required, label);
  return parsed.data.map((raw, i) => {
    const res = schema.safeParse(raw);
    if (!res.success) {
      const issue = res.error.issues[0];
      throw new SchemaError(
        `${label}: row ${i + 1}: column ${issue.path.join(".")}: ${issue.message}`,
      );
    }
    return res.data;
  });
}

function toSweepRow(r: z.infer<typeof sweepRowSchema>): SweepRow {
  return {
    code: r.code, L: r.L, k: r.k, p: r.p,
    wer: r.wer, werSigma: r.wer_sigma, ber: r.ber, berSigma: r.ber_sigma,
    nQubits: r.n_qubits, jMax: r.j_max, seed: r.seed,
  };
}

/** Parses sweep CSV text into one curve set per code.

    Rows are grouped by (code, L, k); each group is sorted by p and must
    have strictly increasing probabilities. */
export function parseSweepCsv(text: string): CurveSet[] {
  const rows = parseRows(text, SWEEP_COLUMNS, sweepRowSchema, "sweep csv").map(
    toSweepRow,
  );
  if (rows.length === 0) {
    throw new SchemaError("sweep csv: no data rows");
  }
  const byCode = new Map<string, Map<string, Series>>();
  for (const row of rows) {
    const groups = byCode.get(row.code) ?? new Map<string, Series>();
    byCode.set(row.code, groups);
    const key = `${row.L}:${row.k}`;
    const series = groups.get(key) ?? { L: row.L, k: row.k, rows: [] };
    groups.set(key, series);
    series.rows.push(row);
  }
  const out: CurveSet[] = [];
  for (const [code, groups] of byCode) {
    const series = [...groups.values()].sort(
      (a, b) => a.L - b.L || a.k - b.k,
    );
    for (const s of series) {
      s.rows.sort((a, b) => a.p - b.p);
      for (let i = 1; i < s.rows.length; i++) {
        if (s.rows[i].p <= s.rows[i - 1].p) {
          throw new SchemaError(
            `sweep csv: ${code} L=${s.L} k=${s.k}: duplicate p=${s.rows[i].p}`,
          );
        }
      }
    }
    out.push({
      code,
      layers: [...new Set(series.map((s) => s.L))].sort((a, b) => a - b),
      ks: [...new Set(series.map((s) => s.k))].sort((a, b) => a - b),
      series,
    });
  }
  return out.sort((a, b) => a.code.localeCompare(b.code));
}

/** Parses a validation-points CSV (subset of the sweep columns). */
export function parsePointsCsv(text: string): PointRow[] {
  return parseRows(text, POINT_COLUMNS, pointRowSchema, "points csv").map(
    (r) => ({
      code: r.code, L: r.L, k: r.k, p: r.p,
      wer: r.wer, werSigma: r.wer_sigma, ber: r.ber, berSigma: r.ber_sigma,
    }),
  );
}
