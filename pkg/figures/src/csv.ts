/**
 * Strict reading of the simulator's CSV outputs.
 *
 * Files are plain comma-separated UTF-8 with a mandatory header row and no
 * quoting; any header mismatch aborts before a figure is drawn.
 */

export class SchemaError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaError";
  }
}

export interface Table {
  header: string[];
  rows: string[][];
  source: string;
}

export const TRAJECTORY_HEADER = ["t", "x_c", "p_c", "x_m", "p_m"];
export const SWEEP_HEADER = [
  "axis",
  "axis_value",
  "delta_omega",
  "delta_xc",
  "amp_ref",
  "amp_shifted",
  "status",
];

export function parseCsv(text: string, source = "<csv>"): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`${source}: empty file`);
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== header.length) {
      throw new SchemaError(
        `${source}:${i + 2}: expected ${header.length} cells, got ${cells.length}`,
      );
    }
    return cells;
  });
  return { header, rows, source };
}

export function requireHeader(table: Table, expected: string[]): void {
  if (
    table.header.length !== expected.length ||
    table.header.some((h, i) => h !== expected[i])
  ) {
    throw new SchemaError(
      `${table.source}: header [${table.header.join(",")}] does not match ` +
        `required schema [${expected.join(",")}]`,
    );
  }
}

/** Numeric cell: the producer writes full-precision floats, `nan` included. */
export function num(cell: string, table: Table, what: string): number {
  const value = Number(cell);
  if (Number.isNaN(value) && cell.trim().toLowerCase() !== "nan") {
    throw new SchemaError(`${table.source}: ${what} is not numeric: ${cell}`);
  }
  return value;
}

export function column(table: Table, name: string): string[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(`${table.source}: missing column ${name}`);
  }
  return table.rows.map((r) => r[idx]);
}
