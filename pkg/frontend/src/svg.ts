/**
 * Minimal deterministic SVG construction: plain string building, fixed
 * attribute order, fixed number formatting, no timestamps or ids.
 */

export const WIDTH = 640;
export const HEIGHT = 480;
export const MARGIN = { top: 40, right: 20, bottom: 48, left: 64 };

export const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
  "#7f7f7f",
];

export function fmt(value: number): string {
  if (!Number.isFinite(value)) return "0";
  const rounded = Number(value.toPrecision(6));
  return Object.is(rounded, -0) ? "0" : String(rounded);
}

export function el(
  tag: string,
  attrs: Record<string, string | number>,
  children: string[] = [],
  text?: string,
): string {
  const attrText = Object.entries(attrs)
    .map(([key, value]) => ` ${key}="${value}"`)
    .join("");
  if (children.length === 0 && text === undefined) {
    return `<${tag}${attrText}/>`;
  }
  const inner = text !== undefined ? escapeText(text) : children.join("");
  return `<${tag}${attrText}>${inner}</${tag}>`;
}

function escapeText(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export interface Scale {
  (value: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const scale = ((value: number) => r0 + ((value - d0) / span) * (r1 - r0)) as Scale;
  scale.domain = domain;
  scale.range = range;
  return scale;
}

export function ticks(domain: [number, number], count = 6): number[] {
  const [lo, hi] = domain;
  const span = hi - lo || 1;
  const rawStep = span / Math.max(count, 1);
  const power = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const candidates = [1, 2, 5, 10].map((m) => m * power);
  const step = candidates.find((c) => span / c <= count) ?? candidates[3];
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = start; v <= hi + 1e-12 * span; v += step) {
    out.push(Number(v.toPrecision(12)));
  }
  return out;
}

export function padDomain(lo: number, hi: number, pad = 0.05): [number, number] {
  if (lo === hi) {
    const eps = Math.abs(lo) || 1;
    return [lo - eps * 0.5, hi + eps * 0.5];
  }
  const span = hi - lo;
  return [lo - pad * span, hi + pad * span];
}

export function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (!Number.isFinite(v)) continue;
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (lo > hi) throw new Error("no finite values to scale");
  return [lo, hi];
}

export function polylinePoints(xs: number[], ys: number[], x: Scale, y: Scale): string {
  const parts: string[] = [];
  for (let i = 0; i < xs.length; i++) {
    parts.push(`${fmt(x(xs[i]))},${fmt(y(ys[i]))}`);
  }
  return parts.join(" ");
}

export interface Frame {
  x: Scale;
  y: Scale;
  body: string[];
}

/** Axes, tick labels, optional title/axis labels around a plot body. */
export function figure(
  frame: Frame,
  opts: { title?: string; xLabel?: string; yLabel?: string; legend?: [string, string][] },
): string {
  const { x, y, body } = frame;
  const parts: string[] = [];
  const [x0, x1] = x.range;
  const [y0, y1] = y.range;
  parts.push(
    el("rect", {
      x: fmt(x0),
      y: fmt(y1),
      width: fmt(x1 - x0),
      height: fmt(y0 - y1),
      fill: "none",
      stroke: "#333333",
      "stroke-width": 1,
    }),
  );
  for (const t of ticks(x.domain)) {
    const px = x(t);
    parts.push(
      el("line", { x1: fmt(px), y1: fmt(y0), x2: fmt(px), y2: fmt(y0 + 5), stroke: "#333333" }),
    );
    parts.push(
      el(
        "text",
        { x: fmt(px), y: fmt(y0 + 20), "text-anchor": "middle", "font-size": 11 },
        [],
        fmt(t),
      ),
    );
  }
  for (const t of ticks(y.domain)) {
    const py = y(t);
    parts.push(
      el("line", { x1: fmt(x0 - 5), y1: fmt(py), x2: fmt(x0), y2: fmt(py), stroke: "#333333" }),
    );
    parts.push(
      el(
        "text",
        { x: fmt(x0 - 8), y: fmt(py + 4), "text-anchor": "end", "font-size": 11 },
        [],
        fmt(t),
      ),
    );
  }
  if (opts.title) {
    parts.push(
      el(
        "text",
        { x: fmt((x0 + x1) / 2), y: 24, "text-anchor": "middle", "font-size": 15 },
        [],
        opts.title,
      ),
    );
  }
  if (opts.xLabel) {
    parts.push(
      el(
        "text",
        { x: fmt((x0 + x1) / 2), y: fmt(y0 + 38), "text-anchor": "middle", "font-size": 12 },
        [],
        opts.xLabel,
      ),
    );
  }
  if (opts.yLabel) {
    parts.push(
      el(
        "text",
        {
          x: 16,
          y: fmt((y0 + y1) / 2),
          "text-anchor": "middle",
          "font-size": 12,
          transform: `rotate(-90 16 ${fmt((y0 + y1) / 2)})`,
        },
        [],
        opts.yLabel,
      ),
    );
  }
  if (opts.legend) {
    opts.legend.forEach(([label, color], i) => {
      const ly = y1 + 16 + 16 * i;
      parts.push(
        el("line", {
          x1: fmt(x1 - 150),
          y1: fmt(ly - 4),
          x2: fmt(x1 - 126),
          y2: fmt(ly - 4),
          stroke: color,
          "stroke-width": 2,
        }),
      );
      parts.push(
        el("text", { x: fmt(x1 - 120), y: fmt(ly), "font-size": 12 }, [], label),
      );
    });
  }
  parts.push(...body);
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
    el("rect", { x: 0, y: 0, width: WIDTH, height: HEIGHT, fill: "#ffffff" }),
    ...parts,
    "</svg>",
  ].join("\n");
}

export function plotScales(
  xDomain: [number, number],
  yDomain: [number, number],
): { x: Scale; y: Scale } {
  return {
    x: linearScale(xDomain, [MARGIN.left, WIDTH - MARGIN.right]),
    y: linearScale(yDomain, [HEIGHT - MARGIN.bottom, MARGIN.top]),
  };
}
