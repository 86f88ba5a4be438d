import { describe, expect, it } from "vitest";

import {
  CsvError,
  numberColumn,
  parseCsv,
  positiveColumn,
  requireSchema,
  stringColumn,
} from "../src/csv";

const FILE = "sample.csv";

describe("parseCsv", () => {
  it("splits a rectangular table into header and rows", () => {
    const table = parseCsv("t,drift\n0,0\n0.5,1e-12\n", FILE);
    expect(table.header).toEqual(["t", "drift"]);
    expect(table.rows).toEqual([
      ["0", "0"],
      ["0.5", "1e-12"],
    ]);
  });

  it("tolerates CRLF line endings", () => {
    const table = parseCsv("t,drift\r\n0,0\r\n", FILE);
    expect(table.rows).toEqual([["0", "0"]]);
  });

  it("rejects ragged rows with the row number", () => {
    expect(() => parseCsv("a,b,c\n1,2,3\n1,2\n", FILE)).toThrowError(
      /row 3: expected 3 fields, found 2/,
    );
  });

  it("rejects an empty file", () => {
    expect(() => parseCsv("", FILE)).toThrowError(/file is empty/);
  });

  it("rejects a header-only file instead of drawing an empty figure", () => {
    expect(() => parseCsv("scheme,t,area\n", FILE)).toThrowError(/no data rows/);
  });
});

describe("requireSchema", () => {
  it("accepts an exact header", () => {
    const table = parseCsv("scheme,t,area\nmidpoint,1,1\n", FILE);
    expect(() => requireSchema(table, ["scheme", "t", "area"])).not.toThrow();
  });

  it("names the offending column on a mismatch", () => {
    const table = parseCsv("path_index,h,error\n0,0.5,0.1\n", FILE);
    let caught: unknown;
    try {
      requireSchema(table, ["path_index", "h", "max_error"]);
    } catch (err) {
      caught = err;
    }
    expect(caught).toBeInstanceOf(CsvError);
    const error = caught as CsvError;
    expect(error.column).toBe("max_error");
    expect(error.message).toContain('column "max_error"');
    expect(error.message).toContain('found "error"');
    expect(error.message).toContain(FILE);
  });

  it("reports a missing trailing column", () => {
    const table = parseCsv("t,y1\n0,1\n", FILE);
    expect(() => requireSchema(table, ["t", "y1", "y2"], true)).toThrowError(
      /column "y2".*found nothing/,
    );
  });

  it("names an unexpected extra column when extras are not allowed", () => {
    const table = parseCsv("t,drift,extra\n0,0,0\n", FILE);
    let caught: CsvError | undefined;
    try {
      requireSchema(table, ["t", "drift"]);
    } catch (err) {
      caught = err as CsvError;
    }
    expect(caught?.column).toBe("extra");
    expect(caught?.message).toContain("unexpected column");
  });

  it("allows extra columns for trajectory-style tables", () => {
    const table = parseCsv("t,y1,y2,j11,j12,j21,j22\n0,1,1,1,0,0,1\n", FILE);
    expect(() => requireSchema(table, ["t", "y1", "y2"], true)).not.toThrow();
  });
});

describe("column readers", () => {
  const table = parseCsv("t,drift\n0,0\n0.5,-2e-3\n", FILE);

  it("parses numeric columns", () => {
    expect(numberColumn(table, "drift")).toEqual([0, -2e-3]);
    expect(stringColumn(table, "t")).toEqual(["0", "0.5"]);
  });

  it("names the column and row for a non-numeric cell", () => {
    const bad = parseCsv("t,drift\n0,oops\n", FILE);
    let caught: CsvError | undefined;
    try {
      numberColumn(bad, "drift");
    } catch (err) {
      caught = err as CsvError;
    }
    expect(caught?.column).toBe("drift");
    expect(caught?.message).toContain('row 2: cannot parse "oops"');
  });

  it("rejects a column that does not exist", () => {
    expect(() => numberColumn(table, "energy")).toThrowError(/column "energy".*missing/);
  });

  it("rejects non-positive values where a log axis needs them", () => {
    const zero = parseCsv("path_index,h,max_error\n0,0.5,0\n", FILE);
    let caught: CsvError | undefined;
    try {
      positiveColumn(zero, "max_error");
    } catch (err) {
      caught = err as CsvError;
    }
    expect(caught?.column).toBe("max_error");
    expect(caught?.message).toContain("positive");
  });
});
