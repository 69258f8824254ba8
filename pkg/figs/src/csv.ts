/**
 * Reader for the versioned stereomc CSV format.
 *
 * Every file starts with a schema comment line
 *   # stereomc-csv v1 kind=<kind> key=value ...
 * followed by a header row and data rows.  Parsing fails fast with the
 * offending file/column named, so a renderer never works from a half-read
 * table.
 */

import { readFileSync } from "fs";

export interface CsvTable {
  kind: string;
  meta: Record<string, string>;
  columns: string[];
  rows: Record<string, string>[];
}

export class SchemaError extends Error {}

export function parseCsv(path: string, expectedKind?: string): CsvTable {
  let text: string;
  try {
    text = readFileSync(path, "utf-8");
  } catch {
    throw new SchemaError(`${path}: cannot read file`);
  }
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length < 2) {
    throw new SchemaError(`${path}: missing schema line or header`);
  }
  const m = lines[0].match(/^# stereomc-csv v1 kind=(\S+)((?:\s+\S+=\S+)*)\s*$/);
  if (!m) {
    throw new SchemaError(`${path}: first line is not a stereomc-csv v1 schema comment`);
  }
  const kind = m[1];
  if (expectedKind && kind !== expectedKind) {
    throw new SchemaError(`${path}: expected kind=${expectedKind}, found kind=${kind}`);
  }
  const meta: Record<string, string> = {};
  for (const part of m[2].trim().split(/\s+/)) {
    if (!part) continue;
    const eq = part.indexOf("=");
    if (eq > 0) meta[part.slice(0, eq)] = part.slice(eq + 1);
  }
  const columns = lines[1].split(",");
  const rows: Record<string, string>[] = [];
  for (let i = 2; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== columns.length) {
      throw new SchemaError(`${path}:${i + 1}: expected ${columns.length} cells, found ${cells.length}`);
    }
    const row: Record<string, string> = {};
    columns.forEach((c, j) => (row[c] = cells[j]));
    rows.push(row);
  }
  return { kind, meta, columns, rows };
}

export function numericColumn(table: CsvTable, name: string, path = "<csv>"): number[] {
  if (!table.columns.includes(name)) {
    throw new SchemaError(`${path}: missing column '${name}' (have: ${table.columns.join(", ")})`);
  }
  return table.rows.map((r, i) => {
    const v = Number(r[name]);
    if (!Number.isFinite(v)) {
      throw new SchemaError(`${path}: non-numeric value '${r[name]}' in column '${name}' at data row ${i + 1}`);
    }
    return v;
  });
}

export function stringColumn(table: CsvTable, name: string, path = "<csv>"): string[] {
  if (!table.columns.includes(name)) {
    throw new SchemaError(`${path}: missing column '${name}' (have: ${table.columns.join(", ")})`);
  }
  return table.rows.map((r) => r[name]);
}

export function requireRows(table: CsvTable, path: string): void {
  if (table.rows.length === 0) {
    throw new SchemaError(`${path}: no data rows`);
  }
}
