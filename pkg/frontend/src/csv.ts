/**
 * Strict CSV reading for the harness output schemas.
 *
 * Files are plain comma-separated with a header row and no quoting; a
 * missing required column or an empty data section is a hard error naming
 * the offender.
 */

import { readFileSync } from "fs";

export interface CsvTable {
  path: string;
  columns: string[];
  /** column name -> values, one entry per data row (strings, unparsed) */
  byColumn: Map<string, string[]>;
  rowCount: number;
}

export function readCsv(path: string): CsvTable {
  const text = readFileSync(path, "utf8");
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new Error(`${path}: empty file`);
  }
  const columns = lines[0].split(",");
  const byColumn = new Map<string, string[]>(columns.map((c) => [c, []]));
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== columns.length) {
      throw new Error(
        `${path}: row ${i} has ${cells.length} cells, expected ${columns.length}`,
      );
    }
    for (let j = 0; j < columns.length; j++) {
      byColumn.get(columns[j])!.push(cells[j]);
    }
  }
  const rowCount = lines.length - 1;
  if (rowCount === 0) {
    throw new Error(`${path}: no data rows`);
  }
  return { path, columns, byColumn, rowCount };
}

export function requireColumn(table: CsvTable, name: string): string[] {
  const values = table.byColumn.get(name);
  if (values === undefined) {
    throw new Error(`${table.path}: missing column '${name}'`);
  }
  return values;
}

export function numericColumn(table: CsvTable, name: string): number[] {
  return requireColumn(table, name).map((cell, i) => {
    const value = Number(cell);
    if (Number.isNaN(value) && cell !== "nan") {
      throw new Error(`${table.path}: row ${i + 1} column '${name}': not a number (${cell})`);
    }
    return value;
  });
}
