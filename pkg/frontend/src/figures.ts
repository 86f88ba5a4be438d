/**
 * The four figure kinds, each a pure function from CSV text to an SVG
 * string, plus the file-based render() entry point used by the CLI.
 *
 * Kinds and their input schemas:
 *   loglog-error      convergence files  path_index,h,max_error
 *   area-snapshots    one area file      scheme,t,area
 *   phase-trajectory  trajectory files   t,y1,y2[,...]
 *   drift             drift files        t,drift
 *
 * Everything is computed upstream; this module only scales, draws, and
 * labels. The SVG is assembled fully in memory and written in one call, so
 * a failing render never leaves a partial or empty image behind.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { basename } from "node:path";

import {
  CsvError,
  numberColumn,
  parseCsv,
  positiveColumn,
  requireSchema,
  stringColumn,
  type Table,
} from "./csv.js";
import {
  color,
  el,
  legend,
  linearScale,
  linearTicks,
  logTickLabel,
  logTicks,
  px,
  svgDocument,
  text,
  tickLabel,
  type LegendEntry,
  type LinearScale,
} from "./svg.js";

export const FIGURE_KINDS = [
  "loglog-error",
  "area-snapshots",
  "phase-trajectory",
  "drift",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

export interface FigureSpec {
  kind: FigureKind;
  /** Input CSV paths; area-snapshots takes exactly one, the others one or more. */
  inputs: string[];
  /** Guide-line slopes, drawn dashed by the loglog-error kind and ignored elsewhere. */
  slopes?: number[];
  /** Output SVG path. */
  output: string;
}

export interface NamedCsv {
  /** Series label, usually the file basename without extension. */
  name: string;
  text: string;
}

const MARGIN = { left: 72, right: 20, top: 42, bottom: 52 } as const;

interface Axis {
  /** Domain in plotting space (log axes pass log10-transformed values). */
  domain: [number, number];
  ticks: { at: number; label: string }[];
  label: string;
}

/** Axes, ticks, grid, and title for one rectangular plot area. */
function frame(
  width: number,
  height: number,
  xAxis: Axis,
  yAxis: Axis,
  title: string,
): { sx: LinearScale; sy: LinearScale; parts: string[] } {
  const x0 = MARGIN.left;
  const y0 = MARGIN.top;
  const x1 = width - MARGIN.right;
  const y1 = height - MARGIN.bottom;
  const sx = linearScale(xAxis.domain, [x0, x1]);
  const sy = linearScale(yAxis.domain, [y1, y0]);
  const parts: string[] = [];

  parts.push(text(width / 2, 24, title, { "font-size": 14, "text-anchor": "middle", "font-weight": "bold" }));
  for (const tick of xAxis.ticks) {
    const x = sx(tick.at);
    parts.push(el("line", { x1: px(x), y1: px(y0), x2: px(x), y2: px(y1), stroke: "#eee" }));
    parts.push(el("line", { x1: px(x), y1: px(y1), x2: px(x), y2: px(y1 + 5), stroke: "#333" }));
    parts.push(text(x, y1 + 18, tick.label, { "font-size": 11, "text-anchor": "middle" }));
  }
  for (const tick of yAxis.ticks) {
    const y = sy(tick.at);
    parts.push(el("line", { x1: px(x0), y1: px(y), x2: px(x1), y2: px(y), stroke: "#eee" }));
    parts.push(el("line", { x1: px(x0 - 5), y1: px(y), x2: px(x0), y2: px(y), stroke: "#333" }));
    parts.push(text(x0 - 8, y + 4, tick.label, { "font-size": 11, "text-anchor": "end" }));
  }
  parts.push(el("rect", {
    x: px(x0), y: px(y0), width: px(x1 - x0), height: px(y1 - y0),
    fill: "none", stroke: "#333",
  }));
  parts.push(text((x0 + x1) / 2, height - 14, xAxis.label, { "font-size": 12, "text-anchor": "middle" }));
  parts.push(el(
    "g",
    { transform: `translate(16 ${px((y0 + y1) / 2)}) rotate(-90)` },
    text(0, 0, yAxis.label, { "font-size": 12, "text-anchor": "middle" }),
  ));
  return { sx, sy, parts };
}

function polyline(points: [number, number][], attrs: Record<string, string | number>): string {
  const coords = points.map(([x, y]) => `${px(x)},${px(y)}`).join(" ");
  return el("polyline", { points: coords, fill: "none", ...attrs });
}

function shortValue(value: number): string {
  const magnitude = Math.abs(value);
  if (value !== 0 && (magnitude >= 1e5 || magnitude < 1e-3)) {
    return value.toExponential(2).replace("e+", "e");
  }
  return String(parseFloat(value.toPrecision(4)));
}

// --------------------------------------------------------------------------
// loglog-error
// --------------------------------------------------------------------------

/**
 * Data-space endpoints of a dashed guide with the given log-log slope,
 * anchored at the reference error at the coarsest step size.
 */
export function computeGuideLine(
  slope: number,
  hMin: number,
  hMax: number,
  errorAtHMax: number,
): { h: [number, number]; e: [number, number] } {
  return {
    h: [hMin, hMax],
    e: [errorAtHMax * (hMin / hMax) ** slope, errorAtHMax],
  };
}

interface ErrorSeries {
  file: string;
  pathIndex: string;
  points: [number, number][]; // (h, max_error), h ascending
}

function errorSeries(table: Table): ErrorSeries[] {
  requireSchema(table, ["path_index", "h", "max_error"]);
  const pathIndex = stringColumn(table, "path_index");
  const h = positiveColumn(table, "h");
  const err = positiveColumn(table, "max_error");
  const order: string[] = [];
  const grouped = new Map<string, [number, number][]>();
  for (let i = 0; i < pathIndex.length; i++) {
    const key = pathIndex[i]!;
    if (!grouped.has(key)) {
      grouped.set(key, []);
      order.push(key);
    }
    grouped.get(key)!.push([h[i]!, err[i]!]);
  }
  return order.map((key) => ({
    file: table.file,
    pathIndex: key,
    points: grouped.get(key)!.slice().sort((a, b) => a[0] - b[0]),
  }));
}

function renderLogLogError(files: NamedCsv[], slopes: number[]): string {
  const perFile = files.map((f) => errorSeries(parseCsv(f.text, f.name)));
  const all = perFile.flat();
  const hs = all.flatMap((s) => s.points.map((p) => p[0]));
  const es = all.flatMap((s) => s.points.map((p) => p[1]));
  const hMin = Math.min(...hs);
  const hMax = Math.max(...hs);
  if (hMin === hMax) {
    throw new CsvError(files[0]!.name, "log-log figure needs at least two distinct step sizes", "h");
  }
  let eMin = Math.min(...es);
  let eMax = Math.max(...es);
  for (const slope of slopes) {
    const eRef = guideReference(all, hMax);
    const guide = computeGuideLine(slope, hMin, hMax, eRef);
    eMin = Math.min(eMin, ...guide.e);
    eMax = Math.max(eMax, ...guide.e);
  }
  if (eMin === eMax) {
    eMin /= 3;
    eMax *= 3;
  }

  const lx = (v: number) => Math.log10(v);
  const padX = 0.04 * (lx(hMax) - lx(hMin));
  const padY = 0.06 * (lx(eMax) - lx(eMin));
  const xAxis: Axis = {
    domain: [lx(hMin) - padX, lx(hMax) + padX],
    ticks: logTicks(hMin, hMax).map((t) => ({ at: lx(t), label: logTickLabel(t) })),
    label: "step size h",
  };
  const yAxis: Axis = {
    domain: [lx(eMin) - padY, lx(eMax) + padY],
    ticks: logTicks(eMin, eMax).map((t) => ({ at: lx(t), label: logTickLabel(t) })),
    label: "pathwise max error",
  };

  const width = 620;
  const height = 440;
  const { sx, sy, parts } = frame(width, height, xAxis, yAxis, "pathwise error vs step size");

  perFile.forEach((seriesList, f) => {
    for (const series of seriesList) {
      const pts = series.points.map(
        ([h, e]) => [sx(lx(h)), sy(lx(e))] as [number, number],
      );
      parts.push(polyline(pts, {
        stroke: color(f),
        "stroke-width": 1.5,
        opacity: 0.85,
        class: "error-path",
        "data-file": series.file,
        "data-path": series.pathIndex,
      }));
      for (const [x, y] of pts) {
        parts.push(el("circle", { cx: px(x), cy: px(y), r: 2.4, fill: color(f) }));
      }
    }
  });

  slopes.forEach((slope, i) => {
    const eRef = guideReference(all, hMax);
    const guide = computeGuideLine(slope, hMin, hMax, eRef);
    const [hA, hB] = guide.h;
    const [eA, eB] = guide.e;
    parts.push(el("line", {
      x1: px(sx(lx(hA))), y1: px(sy(lx(eA))),
      x2: px(sx(lx(hB))), y2: px(sy(lx(eB))),
      stroke: "#444",
      "stroke-width": 1.5,
      "stroke-dasharray": "6 4",
      class: "guide-line",
      "data-slope": String(slope),
    }));
    parts.push(text(sx(lx(hB)) - 4, sy(lx(eB)) - 8 - 14 * i, `slope ${slope}`, {
      "font-size": 11,
      "text-anchor": "end",
      fill: "#444",
    }));
  });

  if (files.length > 1) {
    const entries: LegendEntry[] = files.map((f, i) => ({ label: f.name, stroke: color(i) }));
    parts.push(legend(MARGIN.left + 12, MARGIN.top + 16, entries));
  }
  return svgDocument(width, height, "loglog-error", parts);
}

/** Geometric mean of the errors measured at the coarsest step size. */
function guideReference(all: ErrorSeries[], hMax: number): number {
  const at = all.flatMap((s) => s.points.filter(([h]) => h === hMax).map(([, e]) => e));
  const logs = at.map((e) => Math.log(e));
  return Math.exp(logs.reduce((a, b) => a + b, 0) / logs.length);
}

// --------------------------------------------------------------------------
// area-snapshots
// --------------------------------------------------------------------------

function renderAreaSnapshots(files: NamedCsv[]): string {
  if (files.length !== 1) {
    throw new Error("area-snapshots takes exactly one input CSV");
  }
  const table = parseCsv(files[0]!.text, files[0]!.name);
  requireSchema(table, ["scheme", "t", "area"]);
  const schemeCol = stringColumn(table, "scheme");
  const tCol = numberColumn(table, "t");
  const areaCol = numberColumn(table, "area");
  areaCol.forEach((area, r) => {
    if (area < 0) {
      throw new CsvError(table.file, `row ${r + 2}: negative area ${area}`, "area");
    }
  });

  const schemes: string[] = [];
  for (const s of schemeCol) if (!schemes.includes(s)) schemes.push(s);
  const times = [...new Set(tCol)].sort((a, b) => a - b);
  const byKey = new Map<string, number>();
  for (let i = 0; i < schemeCol.length; i++) {
    byKey.set(`${schemeCol[i]}@${tCol[i]}`, areaCol[i]!);
  }

  const panel = 200;
  const labelBlock = 16 + 13 * schemes.length;
  const gap = 16;
  const perRow = Math.min(times.length, 4);
  const nRows = Math.ceil(times.length / perRow);
  const width = 24 + perRow * (panel + gap);
  const legendH = 40;
  const height = 34 + legendH + nRows * (panel + 26 + labelBlock + gap);

  const parts: string[] = [];
  parts.push(text(width / 2, 24, "evolved square: side = sqrt(area), per snapshot", {
    "font-size": 14, "text-anchor": "middle", "font-weight": "bold",
  }));
  parts.push(legend(24, 46, schemes.map((s, i) => ({ label: s, stroke: color(i) }))));

  times.forEach((t, idx) => {
    const row = Math.floor(idx / perRow);
    const col = idx % perRow;
    const ox = 24 + col * (panel + gap);
    const oy = 34 + legendH + row * (panel + 26 + labelBlock + gap);
    const areas = schemes.map((s) => byKey.get(`${s}@${t}`));
    const sides = areas.map((a) => (a === undefined ? 0 : Math.sqrt(a)));
    const maxSide = Math.max(...sides);
    const scale = maxSide > 0 ? (0.82 * panel) / maxSide : 1;

    const inner: string[] = [];
    inner.push(text(ox + panel / 2, oy - 6, `t = ${tickLabel(t)}`, {
      "font-size": 12, "text-anchor": "middle",
    }));
    inner.push(el("rect", {
      x: px(ox), y: px(oy), width: px(panel), height: px(panel),
      fill: "none", stroke: "#bbb",
    }));
    const cx = ox + panel / 2;
    const cy = oy + panel / 2;
    schemes.forEach((scheme, i) => {
      if (areas[i] === undefined) return;
      const side = sides[i]! * scale;
      inner.push(el("rect", {
        x: px(cx - side / 2), y: px(cy - side / 2),
        width: px(side), height: px(side),
        fill: "none",
        stroke: color(i),
        "stroke-width": 1.6,
        class: "area-square",
        "data-scheme": scheme,
        "data-t": String(t),
      }));
      inner.push(text(ox + 4, oy + panel + 14 + 13 * i, `${scheme}: ${shortValue(areas[i]!)}`, {
        "font-size": 11, fill: color(i),
      }));
    });
    parts.push(el("g", { class: "panel", "data-t": String(t) }, inner));
  });

  return svgDocument(width, height, "area-snapshots", parts);
}

// --------------------------------------------------------------------------
// phase-trajectory
// --------------------------------------------------------------------------

function renderPhaseTrajectory(files: NamedCsv[]): string {
  const series = files.map((f) => {
    const table = parseCsv(f.text, f.name);
    requireSchema(table, ["t", "y1", "y2"], true);
    return {
      name: f.name,
      y1: numberColumn(table, "y1"),
      y2: numberColumn(table, "y2"),
    };
  });

  const xs = series.flatMap((s) => s.y1);
  const ys = series.flatMap((s) => s.y2);
  const cx = (Math.min(...xs) + Math.max(...xs)) / 2;
  const cy = (Math.min(...ys) + Math.max(...ys)) / 2;
  const span = Math.max(
    Math.max(...xs) - Math.min(...xs),
    Math.max(...ys) - Math.min(...ys),
  );
  const half = span > 0 ? 0.54 * span : 1;

  // square plot area so equal data spans render with equal pixel spans
  const side = 400;
  const width = MARGIN.left + side + MARGIN.right;
  const height = MARGIN.top + side + MARGIN.bottom;
  const xAxis: Axis = {
    domain: [cx - half, cx + half],
    ticks: linearTicks(cx - half, cx + half).map((t) => ({ at: t, label: tickLabel(t) })),
    label: "y1",
  };
  const yAxis: Axis = {
    domain: [cy - half, cy + half],
    ticks: linearTicks(cy - half, cy + half).map((t) => ({ at: t, label: tickLabel(t) })),
    label: "y2",
  };
  const { sx, sy, parts } = frame(width, height, xAxis, yAxis, "phase plane trajectory");

  series.forEach((s, i) => {
    const pts = s.y1.map((x, k) => [sx(x), sy(s.y2[k]!)] as [number, number]);
    parts.push(polyline(pts, {
      stroke: color(i),
      "stroke-width": 1.2,
      opacity: 0.9,
      class: "trajectory",
      "data-file": s.name,
    }));
    const [startX, startY] = pts[0]!;
    parts.push(el("circle", {
      cx: px(startX), cy: px(startY), r: 4, fill: color(i),
      class: "start-marker", "data-file": s.name,
    }));
  });

  if (series.length > 1) {
    parts.push(legend(
      MARGIN.left + 12,
      MARGIN.top + 16,
      series.map((s, i) => ({ label: s.name, stroke: color(i) })),
    ));
  }
  return svgDocument(width, height, "phase-trajectory", parts);
}

// --------------------------------------------------------------------------
// drift
// --------------------------------------------------------------------------

function renderDrift(files: NamedCsv[]): string {
  const series = files.map((f) => {
    const table = parseCsv(f.text, f.name);
    requireSchema(table, ["t", "drift"]);
    return {
      name: f.name,
      t: numberColumn(table, "t"),
      drift: numberColumn(table, "drift"),
    };
  });

  const ts = series.flatMap((s) => s.t);
  const ds = series.flatMap((s) => s.drift);
  let lo = Math.min(0, ...ds);
  let hi = Math.max(0, ...ds);
  if (lo === hi) {
    lo -= 1;
    hi += 1;
  }
  const pad = 0.06 * (hi - lo);
  const tLo = Math.min(...ts);
  const tHi = Math.max(...ts);
  const xAxis: Axis = {
    domain: [tLo, tHi === tLo ? tLo + 1 : tHi],
    ticks: linearTicks(tLo, tHi).map((t) => ({ at: t, label: tickLabel(t) })),
    label: "t",
  };
  const yAxis: Axis = {
    domain: [lo - pad, hi + pad],
    ticks: linearTicks(lo, hi).map((t) => ({ at: t, label: tickLabel(t) })),
    label: "invariant drift",
  };

  const width = 620;
  const height = 440;
  const { sx, sy, parts } = frame(width, height, xAxis, yAxis, "drift of the conserved norm");

  const zeroY = sy(0);
  parts.push(el("line", {
    x1: px(sx(xAxis.domain[0])), y1: px(zeroY),
    x2: px(sx(xAxis.domain[1])), y2: px(zeroY),
    stroke: "#999", "stroke-dasharray": "2 3", class: "zero-line",
  }));

  series.forEach((s, i) => {
    const pts = s.t.map((t, k) => [sx(t), sy(s.drift[k]!)] as [number, number]);
    parts.push(polyline(pts, {
      stroke: color(i),
      "stroke-width": 1.4,
      class: "drift-series",
      "data-file": s.name,
    }));
  });

  if (series.length > 1) {
    parts.push(legend(
      MARGIN.left + 12,
      MARGIN.top + 16,
      series.map((s, i) => ({ label: s.name, stroke: color(i) })),
    ));
  }
  return svgDocument(width, height, "drift", parts);
}

// --------------------------------------------------------------------------
// dispatch
// --------------------------------------------------------------------------

/** Render one figure kind from already-loaded CSV text. Pure; never touches disk. */
export function renderFigure(kind: FigureKind, files: NamedCsv[], slopes: number[] = []): string {
  if (files.length === 0) {
    throw new Error("at least one input CSV is required");
  }
  switch (kind) {
    case "loglog-error":
      return renderLogLogError(files, slopes);
    case "area-snapshots":
      return renderAreaSnapshots(files);
    case "phase-trajectory":
      return renderPhaseTrajectory(files);
    case "drift":
      return renderDrift(files);
    default: {
      const never: never = kind;
      throw new Error(`unknown figure kind "${never}"`);
    }
  }
}

/**
 * File-based entry point: read the inputs, render, write the SVG.
 *
 * Inputs are opened read-only and the output is written only after the
 * whole document has been assembled, so failures leave no partial file and
 * repeated calls are idempotent.
 */
export function render(spec: FigureSpec): string {
  const files: NamedCsv[] = spec.inputs.map((path) => ({
    name: basename(path).replace(/\.csv$/i, ""),
    text: readFileSync(path, "utf8"),
  }));
  const svg = renderFigure(spec.kind, files, spec.slopes ?? []);
  writeFileSync(spec.output, svg);
  return svg;
}
