/** Figure renderers: convergence curves, gamma traces, contour overlays and
 * failure-region heatmaps, all emitted as deterministic standalone SVG. */

import { writeFileSync, mkdirSync } from "fs";
import { basename, dirname, resolve } from "path";

import { isoSegments } from "./contour.js";
import { OBJECTIVES_2D } from "./objectives.js";
import {
  FailureCell,
  RunSummary,
  SchemaError,
  TraceRow,
  loadSummaryFor,
  parseFailureMapCsv,
  parseTraceCsv,
} from "./schema.js";
import {
  HEIGHT,
  MARGIN,
  PALETTE,
  SvgDoc,
  WIDTH,
  linearScale,
  logScale,
  polylinePath,
} from "./svg.js";

export type PlotKind =
  | "convergence-f"
  | "convergence-grad"
  | "gamma-trace"
  | "contour-overlay"
  | "failure-map";

export interface PlotSpec {
  kind: PlotKind;
  inputs: string[];
  axes?: { logY?: boolean; x?: "iter" | "oracle_calls" | "wall_seconds" };
  labels?: string[];
  title?: string;
  objective?: string;
  output: string;
}

interface Series {
  label: string;
  rows: TraceRow[];
  summary?: RunSummary;
}

const X_ACCESSORS = {
  iter: (r: TraceRow) => r.iter,
  oracle_calls: (r: TraceRow) => r.oracleCalls,
  wall_seconds: (r: TraceRow) => r.wallSeconds,
} as const;

const X_LABELS = {
  iter: "iteration",
  oracle_calls: "oracle calls",
  wall_seconds: "wall seconds",
} as const;

function loadSeries(spec: PlotSpec, baseDir: string): Series[] {
  if (!spec.inputs || spec.inputs.length === 0) {
    throw new SchemaError("plot spec has no input traces");
  }
  return spec.inputs.map((input, i) => {
    const path = resolve(baseDir, input);
    const rows = parseTraceCsv(path);
    const summary = loadSummaryFor(path);
    const label =
      spec.labels?.[i] ?? summary?.name ?? basename(input).replace(/\.csv$/, "");
    return { label, rows, summary };
  });
}

function plotArea() {
  return {
    x0: MARGIN.left,
    x1: WIDTH - MARGIN.right,
    y0: HEIGHT - MARGIN.bottom,
    y1: MARGIN.top,
  };
}

function renderCurves(
  spec: PlotSpec,
  series: Series[],
  value: (r: TraceRow) => number,
  yLabel: string,
  defaultTitle: string,
): string {
  const xKey = spec.axes?.x ?? "iter";
  const xAcc = X_ACCESSORS[xKey];
  const logY = spec.axes?.logY ?? false;
  const area = plotArea();

  const points = series.map((s) =>
    s.rows.map((r) => [xAcc(r), value(r)] as [number, number]),
  );
  const flat = points.flat().filter(([, v]) => Number.isFinite(v) && (!logY || v > 0));
  if (flat.length === 0) {
    throw new SchemaError("no finite data points to plot");
  }
  const xMin = Math.min(...flat.map(([x]) => x));
  const xMax = Math.max(...flat.map(([x]) => x));
  const yMin = Math.min(...flat.map(([, v]) => v));
  const yMax = Math.max(...flat.map(([, v]) => v));

  const xs = linearScale(xMin, xMax, area.x0, area.x1);
  const ys = logY
    ? logScale(yMin, yMax, area.y0, area.y1)
    : linearScale(yMin, yMax, area.y0, area.y1);

  const doc = new SvgDoc();
  doc.axes(xs, ys, X_LABELS[xKey], yLabel, spec.title ?? defaultTitle);
  series.forEach((s, i) => {
    const pts = points[i]
      .filter(([, v]) => Number.isFinite(v) && (!logY || v > 0))
      .map(([x, v]) => [xs(x), ys(v)] as [number, number]);
    if (pts.length > 0) {
      doc.path(polylinePath(pts), PALETTE[i % PALETTE.length], 2, "series");
    }
  });
  doc.legend(series.map((s) => s.label), series.map((_, i) => PALETTE[i % PALETTE.length]));
  return doc.render();
}

function renderConvergenceF(spec: PlotSpec, series: Series[]): string {
  const logY = spec.axes?.logY ?? true;
  if (!logY) {
    return renderCurves(spec, series, (r) => r.f, "f", "objective value");
  }
  // log scale shows the gap to the best value seen across all traces
  const fMin = Math.min(...series.flatMap((s) => s.rows.map((r) => r.f)));
  const floor = 1e-16 * Math.max(1, Math.abs(fMin));
  const shifted = { ...spec, axes: { ...spec.axes, logY: true } };
  return renderCurves(
    shifted,
    series,
    (r) => Math.max(r.f - fMin, floor),
    "f - f_min",
    "objective gap",
  );
}

function renderContourOverlay(spec: PlotSpec, series: Series[]): string {
  const name = spec.objective ?? "rosenbrock";
  const objective = OBJECTIVES_2D[name];
  if (!objective) {
    throw new SchemaError(
      `unknown 2-D objective '${name}' (choose from ${Object.keys(OBJECTIVES_2D).join(", ")})`,
    );
  }
  const trajectories = series.map((s) => {
    const iterates = s.summary?.iterates;
    if (!iterates || iterates.some((p) => p.length !== 2)) {
      throw new SchemaError(
        `${s.label}: contour-overlay needs a 2-D trace with iterates in its summary`,
      );
    }
    if (iterates.length !== s.rows.length) {
      throw new SchemaError(
        `${s.label}: summary has ${iterates.length} iterates for ${s.rows.length} trace rows`,
      );
    }
    return iterates;
  });

  const allPts = trajectories.flat();
  const pad = 0.3;
  const x0 = Math.min(...allPts.map((p) => p[0])) - pad;
  const x1 = Math.max(...allPts.map((p) => p[0])) + pad;
  const y0 = Math.min(...allPts.map((p) => p[1])) - pad;
  const y1 = Math.max(...allPts.map((p) => p[1])) + pad;

  const n = 141;
  const z = new Float64Array(n * n);
  let zMin = Infinity;
  let zMax = -Infinity;
  for (let j = 0; j < n; j++) {
    for (let i = 0; i < n; i++) {
      const v = objective(x0 + ((x1 - x0) * i) / (n - 1), y0 + ((y1 - y0) * j) / (n - 1));
      z[j * n + i] = v;
      if (v < zMin) zMin = v;
      if (v > zMax) zMax = v;
    }
  }

  const area = plotArea();
  const xs = linearScale(x0, x1, area.x0, area.x1);
  const ys = linearScale(y0, y1, area.y0, area.y1);
  const doc = new SvgDoc();
  doc.axes(xs, ys, "x1", "x2", spec.title ?? `${name} level sets and iterates`);

  const lo = Math.max(zMin, 1e-12) * 1.5;
  const levels: number[] = [];
  for (let k = 0; k < 12; k++) {
    levels.push(lo * Math.pow(zMax / lo, k / 11));
  }
  for (const level of levels) {
    const segs = isoSegments(z, n, n, x0, x1, y0, y1, level);
    if (segs.length === 0) continue;
    const d = segs
      .map(
        ([ax, ay, bx, by]) =>
          `M${xs(ax).toFixed(2)} ${ys(ay).toFixed(2)} L${xs(bx).toFixed(2)} ${ys(by).toFixed(2)}`,
      )
      .join(" ");
    doc.path(d, "#bbbbbb", 0.8, "contour");
  }

  trajectories.forEach((traj, i) => {
    const color = PALETTE[i % PALETTE.length];
    const pts = traj.map((p) => [xs(p[0]), ys(p[1])] as [number, number]);
    doc.path(polylinePath(pts), color, 1.8, "trajectory");
    for (const [cx, cy] of pts) {
      doc.circle(cx, cy, 2.4, color, "iterate");
    }
  });
  doc.legend(series.map((s) => s.label), series.map((_, i) => PALETTE[i % PALETTE.length]));
  return doc.render();
}

const STATUS_COLORS: Record<string, string> = {
  converged: "#2ca02c",
  "max_iters": "#ff7f0e",
  "failed-linalg": "#d62728",
  stalled: "#9467bd",
};

function renderFailureMap(spec: PlotSpec, cells: FailureCell[], label: string): string {
  const xsVals = [...new Set(cells.map((c) => c.x1))].sort((a, b) => a - b);
  const ysVals = [...new Set(cells.map((c) => c.x2))].sort((a, b) => a - b);
  const stepX = xsVals.length > 1 ? xsVals[1] - xsVals[0] : 1;
  const stepY = ysVals.length > 1 ? ysVals[1] - ysVals[0] : 1;
  const area = plotArea();
  const xs = linearScale(xsVals[0] - stepX / 2, xsVals[xsVals.length - 1] + stepX / 2, area.x0, area.x1);
  const ys = linearScale(ysVals[0] - stepY / 2, ysVals[ysVals.length - 1] + stepY / 2, area.y0, area.y1);

  const doc = new SvgDoc();
  doc.axes(xs, ys, "x1 (start)", "x2 (start)", spec.title ?? `run status by starting point: ${label}`);
  for (const c of cells) {
    const px = xs(c.x1 - stepX / 2);
    const py = ys(c.x2 + stepY / 2);
    const w = Math.abs(xs(stepX) - xs(0));
    const h = Math.abs(ys(stepY) - ys(0));
    doc.rect(px, py, w, h, STATUS_COLORS[c.status] ?? "#777777", "cell");
  }
  const statuses = [...new Set(cells.map((c) => c.status))].sort();
  doc.legend(statuses, statuses.map((s) => STATUS_COLORS[s] ?? "#777777"));
  return doc.render();
}

/** Render a plot spec to an SVG string; input paths resolve against baseDir. */
export function renderPlot(spec: PlotSpec, baseDir = "."): string {
  switch (spec.kind) {
    case "convergence-f":
      return renderConvergenceF(spec, loadSeries(spec, baseDir));
    case "convergence-grad":
      return renderCurves(
        { ...spec, axes: { logY: true, ...spec.axes } },
        loadSeries(spec, baseDir),
        (r) => r.gradDualNorm,
        "gradient dual norm",
        "gradient norm",
      );
    case "gamma-trace": {
      const series = loadSeries(spec, baseDir).map((s) => ({
        ...s,
        rows: s.rows.filter((r) => r.iter > 0),
      }));
      return renderCurves(
        { ...spec, axes: { logY: true, ...spec.axes } },
        series,
        (r) => r.gamma,
        "gamma",
        "step-size trace",
      );
    }
    case "contour-overlay":
      return renderContourOverlay(spec, loadSeries(spec, baseDir));
    case "failure-map": {
      if (!spec.inputs || spec.inputs.length !== 1) {
        throw new SchemaError("failure-map takes exactly one grid CSV input");
      }
      const path = resolve(baseDir, spec.inputs[0]);
      const cells = parseFailureMapCsv(path);
      const label = spec.labels?.[0] ?? basename(spec.inputs[0]).replace(/__failure-map\.csv$/, "");
      return renderFailureMap(spec, cells, label);
    }
    default:
      throw new SchemaError(`unknown plot kind '${(spec as PlotSpec).kind}'`);
  }
}

/** Render and write the figure; creates the output directory if needed. */
export function renderPlotFile(spec: PlotSpec, baseDir = "."): string {
  const svg = renderPlot(spec, baseDir);
  const outPath = resolve(baseDir, spec.output);
  mkdirSync(dirname(outPath), { recursive: true });
  writeFileSync(outPath, svg);
  return outPath;
}
