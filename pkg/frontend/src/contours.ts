/**
 * Iso-density contour extraction for the 2D benchmark targets.
 *
 * The target's potential U (negative log density up to a constant) is
 * evaluated on a regular grid and marching squares traces iso-U segments at
 * fixed offsets above the grid minimum, i.e. density levels relative to the
 * mode.
 */

export interface ContourSpec {
  kind: "gaussian" | "mixture" | "banana";
  mean?: number[];
  covDiag?: number[];
  mu?: number[];
  b?: number;
  sigma1?: number;
  /** plotting window [xmin, xmax, ymin, ymax] */
  window?: number[];
  /** iso-potential offsets above the minimum; defaults to 1..4 sigma rings */
  levels?: number[];
}

export type Potential = (x: number, y: number) => number;

export function potentialFor(spec: ContourSpec): Potential {
  if (spec.kind === "gaussian") {
    const mean = spec.mean ?? [0, 0];
    const cov = spec.covDiag ?? [1, 1];
    return (x, y) =>
      0.5 * ((x - mean[0]) ** 2 / cov[0] + (y - mean[1]) ** 2 / cov[1]);
  }
  if (spec.kind === "mixture") {
    const mu = spec.mu ?? [2.5, -2.5];
    return (x, y) => {
      const q1 = 0.5 * ((x - mu[0]) ** 2 + (y - mu[1]) ** 2);
      const q2 = 0.5 * ((x + mu[0]) ** 2 + (y + mu[1]) ** 2);
      const lo = Math.min(q1, q2);
      return lo - Math.log(0.5 * Math.exp(lo - q1) + 0.5 * Math.exp(lo - q2));
    };
  }
  if (spec.kind === "banana") {
    const b = spec.b ?? 0.1;
    const sigma1 = spec.sigma1 ?? 10;
    return (x, y) => {
      const bent = y + b * x * x - b * sigma1 * sigma1;
      return 0.5 * ((x * x) / (sigma1 * sigma1) + bent * bent);
    };
  }
  throw new Error(`unknown contour kind '${(spec as { kind: string }).kind}'`);
}

export function defaultWindow(spec: ContourSpec): [number, number, number, number] {
  if (spec.window) {
    const [a, b, c, d] = spec.window;
    return [a, b, c, d];
  }
  if (spec.kind === "gaussian") {
    const mean = spec.mean ?? [0, 0];
    const cov = spec.covDiag ?? [1, 1];
    const rx = 3.5 * Math.sqrt(cov[0]);
    const ry = 3.5 * Math.sqrt(cov[1]);
    return [mean[0] - rx, mean[0] + rx, mean[1] - ry, mean[1] + ry];
  }
  if (spec.kind === "mixture") {
    const mu = spec.mu ?? [2.5, -2.5];
    const r = Math.max(Math.abs(mu[0]), Math.abs(mu[1])) + 3.5;
    return [-r, r, -r, r];
  }
  const sigma1 = spec.sigma1 ?? 10;
  const b = spec.b ?? 0.1;
  const depth = b * sigma1 * sigma1;
  return [-2.2 * sigma1, 2.2 * sigma1, -3 * depth - 4, depth + 4];
}

export type Segment = [number, number, number, number];

/** Marching squares: iso-line segments of `potential` at one level. */
export function isoSegments(
  potential: Potential,
  window: [number, number, number, number],
  level: number,
  resolution = 81,
): Segment[] {
  const [xmin, xmax, ymin, ymax] = window;
  const nx = resolution;
  const ny = resolution;
  const dx = (xmax - xmin) / (nx - 1);
  const dy = (ymax - ymin) / (ny - 1);
  const grid: number[][] = [];
  for (let j = 0; j < ny; j++) {
    const row: number[] = [];
    for (let i = 0; i < nx; i++) {
      row.push(potential(xmin + i * dx, ymin + j * dy));
    }
    grid.push(row);
  }

  const segments: Segment[] = [];
  const cross = (a: number, b: number) => (level - a) / (b - a);
  for (let j = 0; j < ny - 1; j++) {
    for (let i = 0; i < nx - 1; i++) {
      const x0 = xmin + i * dx;
      const y0 = ymin + j * dy;
      const v00 = grid[j][i];
      const v10 = grid[j][i + 1];
      const v01 = grid[j + 1][i];
      const v11 = grid[j + 1][i + 1];
      // Edge interpolation points, indexed bottom, right, top, left.
      const pts: (readonly [number, number] | null)[] = [
        v00 < level !== v10 < level ? [x0 + dx * cross(v00, v10), y0] : null,
        v10 < level !== v11 < level ? [x0 + dx, y0 + dy * cross(v10, v11)] : null,
        v01 < level !== v11 < level ? [x0 + dx * cross(v01, v11), y0 + dy] : null,
        v00 < level !== v01 < level ? [x0, y0 + dy * cross(v00, v01)] : null,
      ];
      const hits = pts.filter((p): p is readonly [number, number] => p !== null);
      if (hits.length === 2) {
        segments.push([hits[0][0], hits[0][1], hits[1][0], hits[1][1]]);
      } else if (hits.length === 4) {
        // Saddle cell: connect bottom-right and top-left pairs.
        segments.push([hits[0][0], hits[0][1], hits[1][0], hits[1][1]]);
        segments.push([hits[2][0], hits[2][1], hits[3][0], hits[3][1]]);
      }
    }
  }
  return segments;
}

export function contourLevels(spec: ContourSpec, potential: Potential): number[] {
  const window = defaultWindow(spec);
  const offsets = spec.levels ?? [0.5, 2.0, 4.5, 8.0];
  // Grid minimum approximates the mode's potential.
  let min = Infinity;
  const [xmin, xmax, ymin, ymax] = window;
  for (let j = 0; j < 61; j++) {
    for (let i = 0; i < 61; i++) {
      const u = potential(
        xmin + (i * (xmax - xmin)) / 60,
        ymin + (j * (ymax - ymin)) / 60,
      );
      if (u < min) min = u;
    }
  }
  return offsets.map((offset) => min + offset);
}
