#!/usr/bin/env node
// Render one figure from simulator output files.
//
// Usage:
//   fadingkf-plot --kind timeline  --in out/trace.csv     --out fig/timeline.svg
//   fadingkf-plot --kind crossover --in out/mdc_curve.csv --out fig/crossover.svg
//   fadingkf-plot --kind bound     --in out/bound.json    --out fig/bound.svg
//   fadingkf-plot --kind frontier  --in out/sweep.csv     --out fig/frontier.svg
//   ... --data-only writes the plotted series as CSV instead of SVG.

import { mkdirSync, writeFileSync } from "fs";
import { dirname } from "path";
import { pathToFileURL } from "url";
import { FigureSpec, KINDS, Kind, renderFigure, SchemaError } from "./figures.js";

function parseArgs(argv: string[]): FigureSpec {
  let kind: string | undefined;
  let input: string | undefined;
  let output: string | undefined;
  let dataOnly = false;
  for (let i = 0; i < argv.length; i++) {
    switch (argv[i]) {
      case "--kind":
        kind = argv[++i];
        break;
      case "--in":
        input = argv[++i];
        break;
      case "--out":
        output = argv[++i];
        break;
      case "--data-only":
        dataOnly = true;
        break;
      default:
        throw new Error(`unknown argument ${argv[i]}`);
    }
  }
  if (!kind || !(KINDS as readonly string[]).includes(kind)) {
    throw new Error(`--kind must be one of ${KINDS.join(", ")}`);
  }
  if (!input || !output) throw new Error("--in and --out are required");
  return { kind: kind as Kind, input, output, dataOnly };
}

export function main(argv: string[]): number {
  let spec: FigureSpec;
  try {
    spec = parseArgs(argv);
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`);
    return 2;
  }
  try {
    const content = renderFigure(spec);
    mkdirSync(dirname(spec.output), { recursive: true });
    writeFileSync(spec.output, content, "utf-8");
    console.log(`wrote ${spec.output}`);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
      return 2;
    }
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
