#!/usr/bin/env node
import { parseArgs } from "node:util";

import { render } from "./render.js";
import { SchemaError, type Metric } from "./schema.js";

const USAGE =
  "usage: plots render <sweep.csv> --out <dir> [--metric wer|ber] [--points <csv>]";

function fail(message: string): never {
  process.stderr.write(`plots: ${message}\n`);
  process.exit(2);
}

export function main(argv: string[]): void {
  const { values, positionals } = parseArgs({
    args: argv,
    allowPositionals: true,
    options: {
      out: { type: "string" },
      metric: { type: "string" },
      points: { type: "string" },
    },
  });
  if (positionals.length !== 2 || positionals[0] !== "render") {
    fail(USAGE);
  }
  if (!values.out) {
    fail(`--out is required\n${USAGE}`);
  }
  let metric: Metric | undefined;
  if (values.metric !== undefined) {
    if (values.metric !== "wer" && values.metric !== "ber") {
      fail(`--metric must be wer or ber, got ${values.metric}`);
    }
    metric = values.metric;
  }
  try {
    const written = render(positionals[1], values.out, {
      metric,
      pointsPath: values.points,
    });
    for (const file of written) {
      process.stdout.write(`${file}\n`);
    }
  } catch (err) {
    if (err instanceof SchemaError) {
      fail(err.message);
    }
    if (err instanceof Error && "code" in err && err.code === "ENOENT") {
      fail(err.message);
    }
    throw err;
  }
}

main(process.argv.slice(2));
