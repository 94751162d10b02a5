import { execFileSync } from "child_process";
import { mkdtempSync, readFileSync, writeFileSync, existsSync } from "fs";
import { tmpdir } from "os";
import { join, dirname } from "path";
import { fileURLToPath } from "url";
import { describe, expect, it } from "vitest";

import { buildTable, renderFigure, FigureSpec, KINDS, Kind } from "../src/figures.js";
import { toCsv } from "../src/csv.js";

const HERE = dirname(fileURLToPath(import.meta.url));
const FIXTURES = join(HERE, "fixtures");
const GOLDEN = join(HERE, "golden");

const INPUT: Record<Kind, string> = {
  timeline: join(FIXTURES, "trace.csv"),
  crossover: join(FIXTURES, "mdc_curve.csv"),
  bound: join(FIXTURES, "bound.json"),
  frontier: join(FIXTURES, "sweep.csv"),
};

function dataOnly(kind: Kind): string {
  const spec: FigureSpec = { kind, input: INPUT[kind], output: "-", dataOnly: true };
  return renderFigure(spec);
}

describe("data-only outputs", () => {
  it("are byte-stable across repeated runs", () => {
    for (const kind of KINDS) {
      expect(dataOnly(kind)).toEqual(dataOnly(kind));
    }
  });

  it("match the golden files for the crossover and bound figures", () => {
    for (const kind of ["crossover", "bound"] as const) {
      const golden = readFileSync(join(GOLDEN, `${kind}.csv`), "utf-8");
      expect(dataOnly(kind)).toEqual(golden);
    }
  });

  it("round through the csv serializer deterministically", () => {
    for (const kind of KINDS) {
      const table = buildTable({ kind, input: INPUT[kind], output: "-", dataOnly: true });
      expect(toCsv(table.columns, table.rows)).toEqual(dataOnly(kind));
    }
  });
});

describe("svg rendering", () => {
  it("renders every figure kind from the reference inputs", () => {
    const dir = mkdtempSync(join(tmpdir(), "figs-"));
    for (const kind of KINDS) {
      const out = join(dir, `${kind}.svg`);
      const svg = renderFigure({ kind, input: INPUT[kind], output: out });
      expect(svg.startsWith("<svg")).toBe(true);
      expect(svg).toContain("</svg>");
      writeFileSync(out, svg);
      expect(existsSync(out)).toBe(true);
    }
  });

  it("renders an empty-but-valid trace to an empty-axes figure", () => {
    const dir = mkdtempSync(join(tmpdir(), "figs-"));
    const empty = join(dir, "empty.csv");
    const header = readFileSync(INPUT.timeline, "utf-8").split("\n")[0];
    writeFileSync(empty, header + "\n");
    const svg = renderFigure({ kind: "timeline", input: empty, output: "-" });
    expect(svg.startsWith("<svg")).toBe(true);
  });

  it("is deterministic", () => {
    const spec: FigureSpec = { kind: "bound", input: INPUT.bound, output: "-" };
    expect(renderFigure(spec)).toEqual(renderFigure(spec));
  });
});

describe("cli", () => {
  const cliPath = join(HERE, "..", "dist", "cli.js");

  it("exits 0 for every figure kind", () => {
    const dir = mkdtempSync(join(tmpdir(), "cli-"));
    for (const kind of KINDS) {
      execFileSync("node", [
        cliPath, "--kind", kind, "--in", INPUT[kind], "--out", join(dir, `${kind}.svg`),
      ]);
      execFileSync("node", [
        cliPath, "--kind", kind, "--in", INPUT[kind],
        "--out", join(dir, `${kind}.csv`), "--data-only",
      ]);
      expect(existsSync(join(dir, `${kind}.svg`))).toBe(true);
      expect(existsSync(join(dir, `${kind}.csv`))).toBe(true);
    }
  });

  it("rejects a trace from a different schema version with exit 2", () => {
    const dir = mkdtempSync(join(tmpdir(), "cli-"));
    const bad = join(dir, "bad.csv");
    const text = readFileSync(INPUT.timeline, "utf-8").split("\n");
    const cols = text[0].split(",");
    const schemaIdx = cols.indexOf("schema");
    const row = text[1].split(",");
    row[schemaIdx] = "999";
    writeFileSync(bad, [text[0], row.join(",")].join("\n") + "\n");
    let code = 0;
    try {
      execFileSync("node", [cliPath, "--kind", "timeline", "--in", bad, "--out", join(dir, "x.svg")]);
    } catch (err: any) {
      code = err.status;
    }
    expect(code).toBe(2);
  });

  it("rejects unknown kinds with exit 2", () => {
    let code = 0;
    try {
      execFileSync("node", [cliPath, "--kind", "pie", "--in", "x", "--out", "y"]);
    } catch (err: any) {
      code = err.status;
    }
    expect(code).toBe(2);
  });
});
