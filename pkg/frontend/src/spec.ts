/**
 * Figure specification files: JSON documents selecting a figure kind, the
 * input CSVs (one labelled series each), an optional contour target for
 * scatter/trace figures, and the output path.
 */

import { readFileSync } from "fs";
import { dirname, resolve } from "path";

import type { ContourSpec } from "./contours.js";

export type FigureKind = "autocorr" | "mmd" | "scatter" | "trace";

export interface SeriesInput {
  label: string;
  path: string;
}

export interface FigureSpec {
  kind: FigureKind;
  inputs: SeriesInput[];
  output: string;
  title?: string;
  contour?: ContourSpec;
  /** mmd figures: which metric rows to plot (default "mmd_sq") */
  metric?: "mmd" | "mmd_sq";
  /** scatter figures: cap on points per series (deterministic stride) */
  maxPoints?: number;
}

const KINDS: FigureKind[] = ["autocorr", "mmd", "scatter", "trace"];

export function parseFigureSpec(raw: unknown, origin: string): FigureSpec {
  if (typeof raw !== "object" || raw === null) {
    throw new Error(`${origin}: figure spec must be a JSON object`);
  }
  const spec = raw as Record<string, unknown>;
  const kind = spec.kind;
  if (typeof kind !== "string" || !KINDS.includes(kind as FigureKind)) {
    throw new Error(`${origin}: 'kind' must be one of ${KINDS.join(", ")}`);
  }
  if (!Array.isArray(spec.inputs) || spec.inputs.length === 0) {
    throw new Error(`${origin}: 'inputs' must be a nonempty array`);
  }
  const inputs = spec.inputs.map((entry, i) => {
    const item = entry as Record<string, unknown>;
    if (typeof item.label !== "string" || typeof item.path !== "string") {
      throw new Error(`${origin}: inputs[${i}] needs string 'label' and 'path'`);
    }
    return { label: item.label, path: item.path };
  });
  if (typeof spec.output !== "string" || spec.output.length === 0) {
    throw new Error(`${origin}: 'output' must be a nonempty string`);
  }
  const metric = spec.metric;
  if (metric !== undefined && metric !== "mmd" && metric !== "mmd_sq") {
    throw new Error(`${origin}: 'metric' must be "mmd" or "mmd_sq"`);
  }
  return {
    kind: kind as FigureKind,
    inputs,
    output: spec.output,
    title: typeof spec.title === "string" ? spec.title : undefined,
    contour: spec.contour as ContourSpec | undefined,
    metric: metric as "mmd" | "mmd_sq" | undefined,
    maxPoints: typeof spec.maxPoints === "number" ? spec.maxPoints : undefined,
  };
}

export function loadFigureSpec(path: string): FigureSpec {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new Error(`cannot read figure spec ${path}: ${(err as Error).message}`);
  }
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (err) {
    throw new Error(`${path}: invalid JSON: ${(err as Error).message}`);
  }
  const spec = parseFigureSpec(raw, path);
  // Relative paths in a spec file resolve against the file's directory.
  const base = dirname(path);
  return {
    ...spec,
    inputs: spec.inputs.map((input) => ({
      label: input.label,
      path: resolve(base, input.path),
    })),
    output: resolve(base, spec.output),
  };
}
