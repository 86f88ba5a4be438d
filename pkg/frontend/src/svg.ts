/**
 * Minimal deterministic SVG construction: element strings, pixel
 * formatting, axis scales, and tick placement. No timestamps, ids, or
 * randomness anywhere, so identical inputs yield byte-identical output.
 */

export const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#e377c2",
  "#17becf",
] as const;

export function color(index: number): string {
  return PALETTE[index % PALETTE.length]!;
}

/** Pixel coordinate, two decimals, no negative zero. */
export function px(value: number): string {
  const s = value.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
}

export function escapeText(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export type Attrs = Record<string, string | number>;

export function el(tag: string, attrs: Attrs, children?: string[] | string): string {
  const parts = Object.entries(attrs)
    .map(([key, value]) => ` ${key}="${value}"`)
    .join("");
  if (children === undefined) return `<${tag}${parts}/>`;
  const body = typeof children === "string" ? children : children.join("");
  return `<${tag}${parts}>${body}</${tag}>`;
}

export function text(x: number, y: number, content: string, attrs: Attrs = {}): string {
  return el(
    "text",
    { x: px(x), y: px(y), "font-family": "sans-serif", ...attrs },
    escapeText(content),
  );
}

/** Short human label for a tick value. */
export function tickLabel(value: number): string {
  if (value === 0) return "0";
  const magnitude = Math.abs(value);
  if (magnitude >= 1e4 || magnitude < 1e-3) {
    const exp = value.toExponential(1);
    return exp.replace(/\.0e/, "e").replace("e+", "e");
  }
  return String(parseFloat(value.toPrecision(10)));
}

/** Label for a log tick known to be mantissa-in-{1,2,5} times a power of ten. */
export function logTickLabel(value: number): string {
  const exp = Math.floor(Math.log10(value) + 1e-9);
  const mantissa = Math.round(value / 10 ** exp);
  return mantissa === 1 ? `1e${exp}` : `${mantissa}e${exp}`;
}

export interface LinearScale {
  (value: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): LinearScale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const slope = (r1 - r0) / (d1 - d0);
  const scale = ((value: number) => r0 + (value - d0) * slope) as LinearScale;
  scale.domain = domain;
  scale.range = range;
  return scale;
}

/** Round ticks at a 1/2/5 step covering [lo, hi]. */
export function linearTicks(lo: number, hi: number, target = 5): number[] {
  if (!(hi > lo)) return [lo];
  const rawStep = (hi - lo) / target;
  const magnitude = 10 ** Math.floor(Math.log10(rawStep));
  const normalized = rawStep / magnitude;
  const factor = normalized < 1.5 ? 1 : normalized < 3.5 ? 2 : normalized < 7.5 ? 5 : 10;
  const step = factor * magnitude;
  const ticks: number[] = [];
  const start = Math.ceil(lo / step - 1e-9) * step;
  for (let v = start; v <= hi + 1e-9 * step; v += step) {
    ticks.push(Math.abs(v) < 1e-12 * step ? 0 : v);
  }
  return ticks;
}

/**
 * Ticks for a log10 axis over [lo, hi], both positive. Powers of ten; when
 * the span covers few decades the 2x and 5x mantissas are added so short
 * ranges still get readable ticks.
 */
export function logTicks(lo: number, hi: number): number[] {
  const eLo = Math.floor(Math.log10(lo) + 1e-9);
  const eHi = Math.ceil(Math.log10(hi) - 1e-9);
  const mantissas = eHi - eLo <= 3 ? [1, 2, 5] : [1];
  const ticks: number[] = [];
  for (let e = eLo; e <= eHi; e++) {
    for (const m of mantissas) {
      const v = m * 10 ** e;
      if (v >= lo * (1 - 1e-9) && v <= hi * (1 + 1e-9)) ticks.push(v);
    }
  }
  return ticks;
}

export interface LegendEntry {
  label: string;
  stroke: string;
  dash?: string;
}

/** Stacked line+label legend anchored at (x, y) growing downward. */
export function legend(x: number, y: number, entries: LegendEntry[]): string {
  const parts: string[] = [];
  entries.forEach((entry, i) => {
    const yy = y + i * 16;
    parts.push(
      el("line", {
        x1: px(x),
        y1: px(yy),
        x2: px(x + 22),
        y2: px(yy),
        stroke: entry.stroke,
        "stroke-width": 2,
        ...(entry.dash ? { "stroke-dasharray": entry.dash } : {}),
      }),
    );
    parts.push(text(x + 28, yy + 4, entry.label, { "font-size": 12 }));
  });
  return el("g", { class: "legend" }, parts);
}

export function svgDocument(
  width: number,
  height: number,
  kind: string,
  children: string[],
): string {
  return (
    `<?xml version="1.0" encoding="UTF-8"?>\n` +
    el(
      "svg",
      {
        xmlns: "http://www.w3.org/2000/svg",
        width,
        height,
        viewBox: `0 0 ${width} ${height}`,
        "data-kind": kind,
      },
      [
        el("rect", { width, height, fill: "white" }),
        ...children,
      ],
    ) +
    "\n"
  );
}
