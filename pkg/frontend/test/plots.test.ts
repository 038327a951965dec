import { mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";

import { PlotSpec, renderPlot, renderPlotFile } from "../src/plots.js";
import { SchemaError, parseFailureMapCsv, parseTraceCsv } from "../src/schema.js";

const GOLDEN = join(__dirname, "..", "golden");
const ROSEN = [
  "rosenbrock/exact-hess-func-search__x0-000.csv",
  "rosenbrock/inexact-hess-func-search__x0-000.csv",
  "rosenbrock/gradient-method__x0-000.csv",
];
const LSE = [
  "logsumexp/exact-hess-func-search__x0-000.csv",
  "logsumexp/inexact-hess-func-search__x0-000.csv",
  "logsumexp/gradient-method__x0-000.csv",
];

function tmp(): string {
  return mkdtempSync(join(tmpdir(), "plotkit-"));
}

describe("schema", () => {
  it("parses a golden trace", () => {
    const rows = parseTraceCsv(join(GOLDEN, ROSEN[0]));
    expect(rows.length).toBeGreaterThan(1);
    expect(rows[0].iter).toBe(0);
    // f column is non-increasing
    for (let i = 1; i < rows.length; i++) {
      expect(rows[i].f).toBeLessThanOrEqual(rows[i - 1].f);
    }
  });

  it("names the offending column on a header mismatch", () => {
    const dir = tmp();
    const bad = join(dir, "bad.csv");
    writeFileSync(bad, "iter,f,grad_norm,gamma\n0,1.0,1.0,1.0\n");
    expect(() => parseTraceCsv(bad)).toThrowError(/grad_dual_norm/);
  });

  it("parses a golden failure map", () => {
    const cells = parseFailureMapCsv(
      join(GOLDEN, "failure-map/exact-hess-func-search__failure-map.csv"),
    );
    expect(cells.length).toBe(441);
    expect(cells.some((c) => c.status === "failed-linalg")).toBe(true);
  });
});

describe("convergence figures", () => {
  it("renders a log-scale objective-gap figure from three traces", () => {
    const out = join(tmp(), "conv.svg");
    const spec: PlotSpec = {
      kind: "convergence-f",
      inputs: LSE,
      axes: { logY: true, x: "iter" },
      output: out,
    };
    const path = renderPlotFile(spec, GOLDEN);
    const svg = readFileSync(path, "utf8");
    expect(svg.length).toBeGreaterThan(500);
    expect((svg.match(/class="series"/g) ?? []).length).toBe(3);
    // legend labels come from the run summaries
    expect(svg).toContain("Exact Hess., Func. Search");
    // log-y objective gap of a descent method: svg y coordinates only grow
    const firstSeries = svg.split('class="series"')[1].split('"')[2];
    const ys = [...firstSeries.matchAll(/[ML][-0-9.]+ ([-0-9.]+)/g)].map((m) =>
      Number(m[1]),
    );
    for (let i = 1; i < ys.length; i++) {
      expect(ys[i]).toBeGreaterThanOrEqual(ys[i - 1] - 1e-9);
    }
  });

  it("renders gradient-norm and gamma traces over oracle calls", () => {
    for (const kind of ["convergence-grad", "gamma-trace"] as const) {
      const out = join(tmp(), `${kind}.svg`);
      renderPlotFile(
        { kind, inputs: LSE, axes: { logY: true, x: "oracle_calls" }, output: out },
        GOLDEN,
      );
      expect(readFileSync(out, "utf8")).toContain("oracle calls");
    }
  });

  it("is deterministic", () => {
    const spec: PlotSpec = {
      kind: "convergence-grad",
      inputs: ROSEN,
      output: "unused.svg",
    };
    expect(renderPlot(spec, GOLDEN)).toBe(renderPlot(spec, GOLDEN));
  });

  it("rejects an empty input list", () => {
    expect(() =>
      renderPlot({ kind: "convergence-f", inputs: [], output: "x.svg" }, GOLDEN),
    ).toThrowError(SchemaError);
  });
});

describe("contour overlay", () => {
  it("draws one iterate marker per trace row", () => {
    const svg = renderPlot(
      {
        kind: "contour-overlay",
        inputs: ROSEN,
        objective: "rosenbrock",
        output: "unused.svg",
      },
      GOLDEN,
    );
    const rowTotal = ROSEN.map((p) => parseTraceCsv(join(GOLDEN, p)).length).reduce(
      (a, b) => a + b,
      0,
    );
    expect((svg.match(/class="iterate"/g) ?? []).length).toBe(rowTotal);
    expect((svg.match(/class="contour"/g) ?? []).length).toBeGreaterThan(3);
    expect((svg.match(/class="trajectory"/g) ?? []).length).toBe(3);
  });

  it("rejects traces without 2-D iterates", () => {
    expect(() =>
      renderPlot(
        {
          kind: "contour-overlay",
          inputs: [LSE[0]],
          objective: "rosenbrock",
          output: "unused.svg",
        },
        GOLDEN,
      ),
    ).toThrowError(/2-D/);
  });

  it("rejects unknown objectives", () => {
    expect(() =>
      renderPlot(
        {
          kind: "contour-overlay",
          inputs: [ROSEN[0]],
          objective: "himmelblau",
          output: "unused.svg",
        },
        GOLDEN,
      ),
    ).toThrowError(/unknown 2-D objective/);
  });
});

describe("failure map", () => {
  it("renders one cell per grid point with a status legend", () => {
    const svg = renderPlot(
      {
        kind: "failure-map",
        inputs: ["failure-map/exact-hess-func-search__failure-map.csv"],
        output: "unused.svg",
      },
      GOLDEN,
    );
    expect((svg.match(/class="cell"/g) ?? []).length).toBe(441);
    expect(svg).toContain("failed-linalg");
  });

  it("takes exactly one input", () => {
    expect(() =>
      renderPlot(
        {
          kind: "failure-map",
          inputs: [
            "failure-map/exact-hess-func-search__failure-map.csv",
            "failure-map/inexact-hess-func-search__failure-map.csv",
          ],
          output: "unused.svg",
        },
        GOLDEN,
      ),
    ).toThrowError(/exactly one/);
  });
});
