// The four figure kinds. Every kind builds a data table first; the SVG
// and the --data-only CSV are two views of that same table, so golden
// files pin exactly what gets plotted.

import { numColumn, Row, toCsv } from "./csv.js";
import { readBoundReport, readDataCsv, readTrace, SchemaError } from "./schema.js";
import { renderPanel, Series, stackPanels } from "./svg.js";

export const KINDS = ["timeline", "crossover", "bound", "frontier"] as const;
export type Kind = (typeof KINDS)[number];

export interface FigureSpec {
  kind: Kind;
  input: string;
  output: string;
  dataOnly?: boolean;
}

export interface DataTable {
  columns: string[];
  rows: (string | number)[][];
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

function indexedColumns(rows: Row[], prefix: string): string[] {
  if (rows.length === 0) return [];
  const out: string[] = [];
  for (let i = 0; `${prefix}_${i}` in rows[0]; i++) out.push(`${prefix}_${i}`);
  return out;
}

function timelineTable(rows: Row[]): DataTable {
  const gainCols = indexedColumns(rows, "gain_db");
  const uCols = indexedColumns(rows, "u");
  const rateCols = indexedColumns(rows, "rate");
  const columns = ["k", ...gainCols, ...uCols, ...rateCols];
  const body = rows.map((r) => columns.map((c) => (c === "k" ? Number(r[c]) : Number(r[c]))));
  return { columns, rows: body };
}

function timelineSvg(rows: Row[]): string {
  const k = numColumn(rows, "k");
  const panels: string[] = [];
  const groups: [string, string, string][] = [
    ["gain_db", "channel power gain [dB]", "gains"],
    ["u", "transmit power [W]", "power levels"],
    ["rate", "bit-rate [bits]", "bit-rates"],
  ];
  for (const [prefix, yLabel, title] of groups) {
    const cols = indexedColumns(rows, prefix);
    const series: Series[] = cols.map((c, i) => ({
      label: c,
      x: k,
      y: rows.length ? numColumn(rows, c) : [],
      color: PALETTE[i % PALETTE.length],
    }));
    panels.push(renderPanel(series, { title, xLabel: "k", yLabel }));
  }
  return stackPanels(panels);
}

function crossoverTable(rows: Row[]): DataTable {
  const columns = ["gain_db", "sdc", "mdc2", "mdc3"];
  return { columns, rows: rows.map((r) => columns.map((c) => Number(r[c]))) };
}

function crossoverSvg(rows: Row[]): string {
  const x = numColumn(rows, "gain_db");
  const series: Series[] = ["sdc", "mdc2", "mdc3"].map((c, i) => ({
    label: c,
    x,
    y: rows.length ? numColumn(rows, c) : [],
    color: PALETTE[i],
  }));
  return renderPanel(series, {
    title: "expected distortion vs channel power gain",
    xLabel: "gain [dB]",
    yLabel: "expected distortion",
    logY: true,
    height: 360,
  });
}

function boundTable(path: string): DataTable {
  const report = readBoundReport(path);
  const n = Math.min(report.empirical_norm.length, report.bound.length);
  const rows: (string | number)[][] = [];
  for (let k = 0; k < n; k++) {
    rows.push([k, report.empirical_norm[k], report.bound[k]]);
  }
  return { columns: ["k", "empirical_norm", "bound"], rows };
}

function boundSvg(path: string): string {
  const table = boundTable(path);
  const k = table.rows.map((r) => Number(r[0]));
  const series: Series[] = [
    { label: "mean ||P||", x: k, y: table.rows.map((r) => Number(r[1])), color: PALETTE[0] },
    { label: "bound", x: k, y: table.rows.map((r) => Number(r[2])), color: PALETTE[1] },
  ];
  return renderPanel(series, {
    title: "prior covariance norm vs exponential bound",
    xLabel: "k",
    yLabel: "spectral norm",
    logY: true,
    height: 360,
  });
}

function frontierTable(rows: Row[]): DataTable {
  const sorted = [...rows].sort(
    (a, b) => Number(a["energy_weight"]) - Number(b["energy_weight"]),
  );
  const columns = ["energy_weight", "E_total", "phi"];
  return { columns, rows: sorted.map((r) => columns.map((c) => Number(r[c]))) };
}

function frontierSvg(rows: Row[]): string {
  const table = frontierTable(rows);
  const series: Series[] = [
    {
      label: "frontier",
      x: table.rows.map((r) => Number(r[1]) * 1e9),
      y: table.rows.map((r) => Number(r[2])),
      color: PALETTE[0],
    },
  ];
  return renderPanel(series, {
    title: "accuracy / energy frontier over the energy weight",
    xLabel: "total energy [nJ]",
    yLabel: "average posterior trace",
    height: 360,
  });
}

export function buildTable(spec: FigureSpec): DataTable {
  switch (spec.kind) {
    case "timeline":
      return timelineTable(readTrace(spec.input));
    case "crossover":
      return crossoverTable(readDataCsv(spec.input, ["gain_db", "sdc", "mdc2", "mdc3"]));
    case "bound":
      return boundTable(spec.input);
    case "frontier":
      return frontierTable(readDataCsv(spec.input, ["energy_weight", "E_total", "phi"]));
  }
}

export function renderFigure(spec: FigureSpec): string {
  if (spec.dataOnly) {
    const table = buildTable(spec);
    return toCsv(table.columns, table.rows);
  }
  switch (spec.kind) {
    case "timeline":
      return timelineSvg(readTrace(spec.input));
    case "crossover":
      return crossoverSvg(readDataCsv(spec.input, ["gain_db", "sdc", "mdc2", "mdc3"]));
    case "bound":
      return boundSvg(spec.input);
    case "frontier":
      return frontierSvg(readDataCsv(spec.input, ["energy_weight", "E_total", "phi"]));
  }
}

export { SchemaError };
