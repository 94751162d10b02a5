// Minimal CSV reader/writer for the simulator's trace and data files.
// Values never contain commas, quotes or newlines, so no escaping is needed.

export type Row = Record<string, string>;

export function parseCsv(text: string): Row[] {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) return [];
  const header = lines[0].split(",");
  return lines.slice(1).map((line) => {
    const cells = line.split(",");
    const row: Row = {};
    header.forEach((key, i) => {
      row[key] = cells[i] ?? "";
    });
    return row;
  });
}

export function toCsv(columns: string[], rows: (string | number)[][]): string {
  const body = rows.map((r) => r.map(formatCell).join(","));
  return [columns.join(","), ...body].join("\n") + "\n";
}

function formatCell(v: string | number): string {
  if (typeof v === "string") return v;
  if (Number.isInteger(v)) return String(v);
  // shortest round-trip form, stable across runs
  return JSON.stringify(v).replace(/"/g, "");
}

export function numColumn(rows: Row[], key: string): number[] {
  return rows.map((r) => {
    const v = Number(r[key]);
    if (!Number.isFinite(v)) {
      throw new Error(`column ${key} holds a non-numeric value: ${r[key]}`);
    }
    return v;
  });
}
