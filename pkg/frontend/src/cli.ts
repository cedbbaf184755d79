#!/usr/bin/env node
/**
 * Usage: mhmc-render <figure-spec.json> [...more specs]
 *
 * Renders each figure spec to its configured SVG output path.  On any
 * error nothing is written for that spec and the process exits nonzero.
 */

import { mkdirSync, writeFileSync } from "fs";
import { dirname } from "path";
import { pathToFileURL } from "url";

import { renderFigure } from "./figures.js";
import { loadFigureSpec } from "./spec.js";

export function main(argv: string[]): number {
  if (argv.length === 0) {
    process.stderr.write("usage: mhmc-render <figure-spec.json> [...]\n");
    return 2;
  }
  for (const specPath of argv) {
    try {
      const spec = loadFigureSpec(specPath);
      const svg = renderFigure(spec);
      mkdirSync(dirname(spec.output), { recursive: true });
      writeFileSync(spec.output, svg + "\n");
      process.stdout.write(`${spec.output}\n`);
    } catch (err) {
      process.stderr.write(`error: ${(err as Error).message}\n`);
      return 1;
    }
  }
  return 0;
}

if (
  process.argv[1] !== undefined &&
  import.meta.url === pathToFileURL(process.argv[1]).href
) {
  process.exitCode = main(process.argv.slice(2));
}
