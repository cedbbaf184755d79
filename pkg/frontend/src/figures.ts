/**
 * Figure rendering: CSV tables in, one SVG string out per figure spec.
 *
 * All statistics are read from the harness CSVs verbatim; nothing is
 * recomputed here, so these plots stay a pure presentation layer.
 */

import {
  contourLevels,
  defaultWindow,
  isoSegments,
  potentialFor,
} from "./contours.js";
import { numericColumn, readCsv, requireColumn, type CsvTable } from "./csv.js";
import type { FigureSpec, SeriesInput } from "./spec.js";
import {
  PALETTE,
  el,
  extent,
  figure,
  fmt,
  padDomain,
  plotScales,
  polylinePoints,
  type Scale,
} from "./svg.js";

export function renderFigure(spec: FigureSpec): string {
  switch (spec.kind) {
    case "autocorr":
      return renderMetricLines(spec, "autocorr", "lag", "autocorrelation");
    case "mmd":
      return renderMetricLines(spec, spec.metric ?? "mmd_sq", "samples", spec.metric ?? "mmd_sq");
    case "scatter":
      return renderScatter(spec);
    case "trace":
      return renderTrace(spec);
  }
}

interface Series {
  label: string;
  xs: number[];
  ys: number[];
}

function metricSeries(input: SeriesInput, metric: string): Series {
  const table = readCsv(input.path);
  const metrics = requireColumn(table, "metric");
  const lags = requireColumn(table, "lag");
  const values = requireColumn(table, "value");
  const xs: number[] = [];
  const ys: number[] = [];
  for (let i = 0; i < table.rowCount; i++) {
    if (metrics[i] !== metric) continue;
    xs.push(Number(lags[i]));
    ys.push(Number(values[i]));
  }
  if (xs.length === 0) {
    throw new Error(`${input.path}: no '${metric}' rows`);
  }
  return { label: input.label, xs, ys };
}

function renderMetricLines(
  spec: FigureSpec,
  metric: string,
  xLabel: string,
  yLabel: string,
): string {
  const series = spec.inputs.map((input) => metricSeries(input, metric));
  const xDomain = padDomain(
    ...extent(series.flatMap((s) => s.xs)),
    0.02,
  );
  const yValues = series.flatMap((s) => s.ys);
  const yDomain = padDomain(Math.min(0, ...yValues), Math.max(...yValues));
  const { x, y } = plotScales(xDomain, yDomain);
  const body = series.map((s, i) =>
    el("polyline", {
      points: polylinePoints(s.xs, s.ys, x, y),
      fill: "none",
      stroke: PALETTE[i % PALETTE.length],
      "stroke-width": 1.8,
    }),
  );
  return figure(
    { x, y, body },
    {
      title: spec.title,
      xLabel,
      yLabel,
      legend: series.map((s, i) => [s.label, PALETTE[i % PALETTE.length]]),
    },
  );
}

function positionColumns(table: CsvTable): [number[], number[]] {
  return [numericColumn(table, "theta_1"), numericColumn(table, "theta_2")];
}

function contourBody(spec: FigureSpec, x: Scale, y: Scale): string[] {
  if (!spec.contour) return [];
  const potential = potentialFor(spec.contour);
  const window = defaultWindow(spec.contour);
  const body: string[] = [];
  for (const level of contourLevels(spec.contour, potential)) {
    for (const [x1, y1, x2, y2] of isoSegments(potential, window, level)) {
      body.push(
        el("line", {
          x1: fmt(x(x1)),
          y1: fmt(y(y1)),
          x2: fmt(x(x2)),
          y2: fmt(y(y2)),
          stroke: "#bbbbbb",
          "stroke-width": 0.8,
        }),
      );
    }
  }
  return body;
}

function scatterDomains(
  spec: FigureSpec,
  xs: number[],
  ys: number[],
): [[number, number], [number, number]] {
  if (spec.contour) {
    const [xmin, xmax, ymin, ymax] = defaultWindow(spec.contour);
    return [
      padDomain(Math.min(xmin, ...xs), Math.max(xmax, ...xs), 0.02),
      padDomain(Math.min(ymin, ...ys), Math.max(ymax, ...ys), 0.02),
    ];
  }
  return [padDomain(...extent(xs)), padDomain(...extent(ys))];
}

function renderScatter(spec: FigureSpec): string {
  const maxPoints = spec.maxPoints ?? 2000;
  const series = spec.inputs.map((input) => {
    const table = readCsv(input.path);
    const [t1, t2] = positionColumns(table);
    const stride = Math.max(1, Math.ceil(t1.length / maxPoints));
    const xs: number[] = [];
    const ys: number[] = [];
    for (let i = 0; i < t1.length; i += stride) {
      xs.push(t1[i]);
      ys.push(t2[i]);
    }
    return { label: input.label, xs, ys };
  });
  const allX = series.flatMap((s) => s.xs);
  const allY = series.flatMap((s) => s.ys);
  const [xDomain, yDomain] = scatterDomains(spec, allX, allY);
  const { x, y } = plotScales(xDomain, yDomain);
  const body = contourBody(spec, x, y);
  series.forEach((s, i) => {
    for (let k = 0; k < s.xs.length; k++) {
      body.push(
        el("circle", {
          cx: fmt(x(s.xs[k])),
          cy: fmt(y(s.ys[k])),
          r: 1.6,
          fill: PALETTE[i % PALETTE.length],
          "fill-opacity": 0.55,
        }),
      );
    }
  });
  return figure(
    { x, y, body },
    {
      title: spec.title,
      xLabel: "theta_1",
      yLabel: "theta_2",
      legend: series.map((s, i) => [s.label, PALETTE[i % PALETTE.length]]),
    },
  );
}

function renderTrace(spec: FigureSpec): string {
  const series = spec.inputs.map((input) => {
    const table = readCsv(input.path);
    requireColumn(table, "step");
    const [xs, ys] = positionColumns(table);
    return { label: input.label, xs, ys };
  });
  const allX = series.flatMap((s) => s.xs);
  const allY = series.flatMap((s) => s.ys);
  const [xDomain, yDomain] = scatterDomains(spec, allX, allY);
  const { x, y } = plotScales(xDomain, yDomain);
  const body = contourBody(spec, x, y);
  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    body.push(
      el("polyline", {
        points: polylinePoints(s.xs, s.ys, x, y),
        fill: "none",
        stroke: color,
        "stroke-width": 1.4,
      }),
    );
    // Start and end markers of the proposal path.
    body.push(
      el("circle", { cx: fmt(x(s.xs[0])), cy: fmt(y(s.ys[0])), r: 3.5, fill: color }),
    );
    const last = s.xs.length - 1;
    body.push(
      el("circle", {
        cx: fmt(x(s.xs[last])),
        cy: fmt(y(s.ys[last])),
        r: 3.5,
        fill: "none",
        stroke: color,
        "stroke-width": 1.5,
      }),
    );
  });
  return figure(
    { x, y, body },
    {
      title: spec.title,
      xLabel: "theta_1",
      yLabel: "theta_2",
      legend: series.map((s, i) => [s.label, PALETTE[i % PALETTE.length]]),
    },
  );
}
