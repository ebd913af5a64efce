/**
 * Reader for the engine's CSV outputs: `#`-prefixed key=value header
 * comments, one column-name row, then comma-separated data rows.
 */

import { readFileSync } from "node:fs";

export interface CsvTable {
  params: Record<string, string>;
  columns: string[];
  rows: string[][];
}

export function parseCsv(text: string): CsvTable {
  const params: Record<string, string> = {};
  const rows: string[][] = [];
  let columns: string[] | null = null;

  for (const rawLine of text.split(/\r?\n/)) {
    const line = rawLine.trim();
    if (line.length === 0) continue;
    if (line.startsWith("#")) {
      const body = line.slice(1).trim();
      const eq = body.indexOf("=");
      if (eq > 0) params[body.slice(0, eq).trim()] = body.slice(eq + 1).trim();
      continue;
    }
    if (columns === null) {
      columns = line.split(",").map((c) => c.trim());
      continue;
    }
    rows.push(line.split(",").map((c) => c.trim()));
  }
  if (columns === null) throw new Error("CSV has no column header row");
  if (rows.length === 0) throw new Error("CSV has no data rows");
  return { params, columns, rows };
}

export function loadCsv(path: string): CsvTable {
  return parseCsv(readFileSync(path, "utf-8"));
}

export function columnIndex(table: CsvTable, name: string): number {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new Error(
      `missing column '${name}' (have: ${table.columns.join(", ")})`,
    );
  }
  return idx;
}

/** Group rows into one numeric (x, y) polyline per distinct key value. */
export function seriesByKey(
  table: CsvTable,
  keyCol: string,
  xCol: string,
  yCol: string,
): Map<string, Array<[number, number]>> {
  const k = columnIndex(table, keyCol);
  const x = columnIndex(table, xCol);
  const y = columnIndex(table, yCol);
  const out = new Map<string, Array<[number, number]>>();
  for (const row of table.rows) {
    const xv = Number(row[x]);
    const yv = Number(row[y]);
    if (!Number.isFinite(xv) || !Number.isFinite(yv)) continue;
    const key = row[k];
    if (!out.has(key)) out.set(key, []);
    out.get(key)!.push([xv, yv]);
  }
  for (const pts of out.values()) pts.sort((a, b) => a[0] - b[0]);
  return out;
}
