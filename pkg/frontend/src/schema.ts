// Input-file validation: the plots are pure views over the simulator's
// outputs and refuse inputs from a different trace schema version.

import { readFileSync } from "fs";
import { parseCsv, Row } from "./csv.js";

export const SUPPORTED_SCHEMA = 1;

export class SchemaError extends Error {}

export function readTrace(path: string): Row[] {
  const rows = parseCsv(readFileSync(path, "utf-8"));
  for (const row of rows) {
    const v = Number(row["schema"]);
    if (v !== SUPPORTED_SCHEMA) {
      throw new SchemaError(`trace schema ${row["schema"]} != supported ${SUPPORTED_SCHEMA}`);
    }
  }
  return rows;
}

export function readDataCsv(path: string, required: string[]): Row[] {
  const rows = parseCsv(readFileSync(path, "utf-8"));
  if (rows.length > 0) {
    for (const key of required) {
      if (!(key in rows[0])) {
        throw new SchemaError(`${path}: missing column ${key}`);
      }
    }
  }
  return rows;
}

export interface BoundReport {
  rho: number;
  c: number;
  empirical_norm: number[];
  bound: number[];
  pass?: boolean;
}

export function readBoundReport(path: string): BoundReport {
  const doc = JSON.parse(readFileSync(path, "utf-8"));
  for (const key of ["rho", "c", "empirical_norm", "bound"]) {
    if (!(key in doc)) throw new SchemaError(`${path}: missing field ${key}`);
  }
  return doc as BoundReport;
}
