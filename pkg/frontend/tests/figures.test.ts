import { mkdtempSync, readFileSync, existsSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { CsvError } from "../src/csv";
import {
  computeGuideLine,
  render,
  renderFigure,
  type FigureKind,
  type NamedCsv,
} from "../src/figures";
import { linearTicks, logTicks, tickLabel } from "../src/svg";

function fixture(name: string): string {
  return fileURLToPath(new URL(`./fixtures/${name}`, import.meta.url));
}

function fixtureCsv(name: string): NamedCsv {
  return { name: name.replace(/\.csv$/, ""), text: readFileSync(fixture(name), "utf8") };
}

function count(haystack: string, needle: string): number {
  return haystack.split(needle).length - 1;
}

describe("svg scale helpers", () => {
  it("places linear ticks at round steps", () => {
    expect(linearTicks(0, 1)).toEqual([0, 0.2, 0.4, 0.6000000000000001, 0.8, 1]);
    expect(linearTicks(0, 10).at(-1)).toBe(10);
  });

  it("places log ticks at 1/2/5 mantissas over short ranges", () => {
    expect(logTicks(1e-3, 6e-2)).toEqual([1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2]);
  });

  it("formats tick labels compactly", () => {
    expect(tickLabel(0)).toBe("0");
    expect(tickLabel(0.30000000000000004)).toBe("0.3");
    expect(tickLabel(2500)).toBe("2500");
    expect(tickLabel(1e-5)).toBe("1e-5");
    expect(tickLabel(-2.5e7)).toBe("-2.5e7");
  });
});

describe("loglog-error", () => {
  it("draws one polyline per path and a dashed guide per slope", () => {
    const svg = renderFigure("loglog-error", [fixtureCsv("convergence-midpoint.csv")], [0.2, 0.5]);
    expect(count(svg, 'class="error-path"')).toBe(5);
    expect(count(svg, 'class="guide-line"')).toBe(2);
    expect(svg).toContain('data-slope="0.2"');
    expect(svg).toContain('data-slope="0.5"');
    expect(svg).toContain("stroke-dasharray");
    expect(svg).toContain("slope 0.2");
    expect(svg).toContain('data-kind="loglog-error"');
    expect(svg).not.toContain("NaN");
  });

  it("overlays several files with a legend and distinct colors", () => {
    const svg = renderFigure(
      "loglog-error",
      [fixtureCsv("convergence-midpoint.csv"), fixtureCsv("convergence-euler2.csv")],
      [],
    );
    expect(count(svg, 'class="error-path"')).toBe(10);
    expect(svg).toContain('class="legend"');
    expect(svg).toContain("convergence-midpoint");
    expect(svg).toContain("convergence-euler2");
    expect(svg).toContain("#1f77b4");
    expect(svg).toContain("#d62728");
  });

  it("guide lines follow e = e_ref (h/h_max)^slope exactly", () => {
    for (const slope of [0.2, 0.5, 2.0]) {
      const guide = computeGuideLine(slope, 1e-3, 0.0625, 0.125);
      const ratio = guide.e[0] / guide.e[1];
      expect(ratio).toBeCloseTo((1e-3 / 0.0625) ** slope, 12);
      expect(guide.e[1]).toBe(0.125);
      expect(guide.h).toEqual([1e-3, 0.0625]);
    }
  });

  it("rejects a wrong schema naming the offending column", () => {
    const bad: NamedCsv = { name: "drift", text: "t,drift\n0,1\n" };
    let caught: CsvError | undefined;
    try {
      renderFigure("loglog-error", [bad], []);
    } catch (err) {
      caught = err as CsvError;
    }
    expect(caught?.column).toBe("path_index");
  });

  it("rejects zero errors that a log axis cannot show", () => {
    const bad: NamedCsv = {
      name: "conv",
      text: "path_index,h,max_error\n0,0.5,0.1\n0,0.25,0\n",
    };
    expect(() => renderFigure("loglog-error", [bad], [])).toThrowError(/positive/);
  });

  it("rejects a single step size", () => {
    const bad: NamedCsv = {
      name: "conv",
      text: "path_index,h,max_error\n0,0.5,0.1\n1,0.5,0.2\n",
    };
    expect(() => renderFigure("loglog-error", [bad], [])).toThrowError(/two distinct step sizes/);
  });
});

describe("area-snapshots", () => {
  it("draws one panel per snapshot and one square per scheme", () => {
    const svg = renderFigure("area-snapshots", [fixtureCsv("area.csv")], []);
    expect(count(svg, 'class="panel"')).toBe(3); // t = 0.4, 1.6, 8
    expect(count(svg, 'class="area-square"')).toBe(12); // 4 schemes x 3 panels
    expect(svg).toContain("midpoint:");
    expect(svg).toContain("exact:");
    expect(svg).toContain('data-scheme="euler3"');
    expect(svg).not.toContain("NaN");
  });

  it("requires exactly one input file", () => {
    const file = fixtureCsv("area.csv");
    expect(() => renderFigure("area-snapshots", [file, file], [])).toThrowError(
      /exactly one input/,
    );
  });

  it("rejects negative areas", () => {
    const bad: NamedCsv = { name: "area", text: "scheme,t,area\nmidpoint,1,-2\n" };
    let caught: CsvError | undefined;
    try {
      renderFigure("area-snapshots", [bad], []);
    } catch (err) {
      caught = err as CsvError;
    }
    expect(caught?.column).toBe("area");
    expect(caught?.message).toContain("negative area");
  });
});

describe("phase-trajectory", () => {
  it("accepts trajectory files with extra Jacobian columns", () => {
    const svg = renderFigure(
      "phase-trajectory",
      [fixtureCsv("trajectory-midpoint-jacobian.csv")],
      [],
    );
    expect(count(svg, 'class="trajectory"')).toBe(1);
    expect(count(svg, 'class="start-marker"')).toBe(1);
    expect(svg).not.toContain("NaN");
  });

  it("overlays several trajectories with a legend", () => {
    const svg = renderFigure(
      "phase-trajectory",
      [fixtureCsv("trajectory-midpoint-jacobian.csv"), fixtureCsv("trajectory-euler3.csv")],
      [],
    );
    expect(count(svg, 'class="trajectory"')).toBe(2);
    expect(svg).toContain("trajectory-euler3");
  });

  it("survives a degenerate single-point trajectory", () => {
    const point: NamedCsv = { name: "still", text: "t,y1,y2\n0,1,1\n1,1,1\n" };
    const svg = renderFigure("phase-trajectory", [point], []);
    expect(svg).not.toContain("NaN");
  });

  it("names a missing state column", () => {
    const bad: NamedCsv = { name: "traj", text: "t,y1\n0,1\n" };
    let caught: CsvError | undefined;
    try {
      renderFigure("phase-trajectory", [bad], []);
    } catch (err) {
      caught = err as CsvError;
    }
    expect(caught?.column).toBe("y2");
  });
});

describe("drift", () => {
  it("draws a zero reference line and one series per file", () => {
    const svg = renderFigure(
      "drift",
      [fixtureCsv("drift-midpoint.csv"), fixtureCsv("drift-euler3.csv")],
      [],
    );
    expect(count(svg, 'class="zero-line"')).toBe(1);
    expect(count(svg, 'class="drift-series"')).toBe(2);
    expect(svg).toContain("drift-midpoint");
    expect(svg).not.toContain("NaN");
  });

  it("handles an identically zero drift", () => {
    const flat: NamedCsv = { name: "flat", text: "t,drift\n0,0\n1,0\n2,0\n" };
    const svg = renderFigure("drift", [flat], []);
    expect(svg).not.toContain("NaN");
    expect(svg).toContain('class="zero-line"');
  });
});

describe("render entry point", () => {
  it("is deterministic and never mutates its inputs", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-"));
    const input = fixture("area.csv");
    const before = readFileSync(input);
    const out1 = join(dir, "a.svg");
    const out2 = join(dir, "b.svg");
    render({ kind: "area-snapshots", inputs: [input], output: out1 });
    render({ kind: "area-snapshots", inputs: [input], output: out2 });
    expect(readFileSync(out1)).toEqual(readFileSync(out2));
    expect(readFileSync(input)).toEqual(before);
    expect(readFileSync(out1, "utf8")).toContain("<svg");
  });

  it("writes nothing when the input is off-schema", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-"));
    const bad = join(dir, "bad.csv");
    writeFileSync(bad, "a,b\n1,2\n");
    const out = join(dir, "out.svg");
    expect(() => render({ kind: "drift", inputs: [bad], output: out })).toThrow(CsvError);
    expect(existsSync(out)).toBe(false);
  });

  it("writes nothing for an empty CSV", () => {
    const dir = mkdtempSync(join(tmpdir(), "plots-"));
    const empty = join(dir, "empty.csv");
    writeFileSync(empty, "t,drift\n");
    const out = join(dir, "out.svg");
    expect(() => render({ kind: "drift", inputs: [empty], output: out })).toThrowError(
      /no data rows/,
    );
    expect(existsSync(out)).toBe(false);
  });

  it("rejects an unknown kind and an empty input list", () => {
    expect(() => renderFigure("histogram" as FigureKind, [fixtureCsv("area.csv")], [])).toThrowError(
      /unknown figure kind/,
    );
    expect(() => renderFigure("drift", [], [])).toThrowError(/at least one input/);
  });
});

describe("every figure kind renders the real experiment outputs", () => {
  const cases: [FigureKind, string[], number[]][] = [
    ["loglog-error", ["convergence-midpoint.csv", "convergence-euler2.csv"], [0.2, 0.5]],
    ["area-snapshots", ["area.csv"], []],
    ["phase-trajectory", ["trajectory-midpoint-jacobian.csv", "trajectory-euler3.csv"], []],
    ["drift", ["drift-midpoint.csv", "drift-euler3.csv"], []],
  ];
  for (const [kind, names, slopes] of cases) {
    it(`renders ${kind}`, () => {
      const svg = renderFigure(kind, names.map(fixtureCsv), slopes);
      expect(svg.startsWith('<?xml version="1.0"')).toBe(true);
      expect(svg).toContain(`data-kind="${kind}"`);
      expect(svg.endsWith("</svg>\n")).toBe(true);
      expect(svg).not.toContain("NaN");
      expect(svg).not.toContain("Infinity");
    });
  }
});
