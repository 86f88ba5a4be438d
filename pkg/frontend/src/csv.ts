/**
 * Strict reader for the experiment CSVs.
 *
 * The emitting side writes plain comma-separated numeric tables with a
 * single header row and no quoting, so parsing is a straight split; all the
 * value of this module is in the validation. Every failure is a CsvError
 * that names the file and, when one is at fault, the offending column.
 */

export class CsvError extends Error {
  readonly file: string;
  readonly column?: string;

  constructor(file: string, message: string, column?: string) {
    super(
      column === undefined
        ? `${file}: ${message}`
        : `${file}: column "${column}": ${message}`,
    );
    this.name = "CsvError";
    this.file = file;
    this.column = column;
  }
}

export interface Table {
  file: string;
  header: string[];
  rows: string[][];
}

/** Split CSV text into a header and data rows, insisting on a rectangle. */
export function parseCsv(text: string, file: string): Table {
  const lines = text
    .split("\n")
    .map((line) => (line.endsWith("\r") ? line.slice(0, -1) : line));
  while (lines.length > 0 && lines[lines.length - 1] === "") lines.pop();
  if (lines.length === 0) {
    throw new CsvError(file, "file is empty, expected a header row");
  }
  const header = lines[0]!.split(",");
  const rows: string[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const fields = lines[i]!.split(",");
    if (fields.length !== header.length) {
      throw new CsvError(
        file,
        `row ${i + 1}: expected ${header.length} fields, found ${fields.length}`,
      );
    }
    rows.push(fields);
  }
  if (rows.length === 0) {
    throw new CsvError(file, "no data rows, refusing to draw an empty figure");
  }
  return { file, header, rows };
}

/**
 * Check the header against the expected column names.
 *
 * With allowExtra the expected names only have to be a prefix (trajectory
 * files may carry extra state or Jacobian columns); otherwise the header
 * must match exactly.
 */
export function requireSchema(
  table: Table,
  expected: string[],
  allowExtra = false,
): void {
  for (let i = 0; i < expected.length; i++) {
    const want = expected[i]!;
    const got = table.header[i];
    if (got !== want) {
      throw new CsvError(
        table.file,
        `schema mismatch: expected column ${i + 1} to be "${want}", found ` +
          (got === undefined ? "nothing" : `"${got}"`),
        want,
      );
    }
  }
  if (!allowExtra && table.header.length > expected.length) {
    const extra = table.header[expected.length]!;
    throw new CsvError(table.file, "schema mismatch: unexpected column", extra);
  }
}

/** Parse one named column as finite numbers. */
export function numberColumn(table: Table, name: string): number[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new CsvError(table.file, "schema mismatch: column is missing", name);
  }
  return table.rows.map((row, r) => {
    const raw = row[idx]!;
    const value = raw.trim() === "" ? NaN : Number(raw);
    if (!Number.isFinite(value)) {
      throw new CsvError(
        table.file,
        `row ${r + 2}: cannot parse "${raw}" as a number`,
        name,
      );
    }
    return value;
  });
}

/** Like numberColumn but additionally demands strictly positive values. */
export function positiveColumn(table: Table, name: string): number[] {
  const values = numberColumn(table, name);
  values.forEach((value, r) => {
    if (value <= 0) {
      throw new CsvError(
        table.file,
        `row ${r + 2}: a log axis needs positive values, got ${value}`,
        name,
      );
    }
  });
  return values;
}

export function stringColumn(table: Table, name: string): string[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new CsvError(table.file, "schema mismatch: column is missing", name);
  }
  return table.rows.map((row) => row[idx]!);
}
