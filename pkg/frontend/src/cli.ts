#!/usr/bin/env node
/** plotkit <spec.json> -- render one figure from benchmark artifacts. */

import { readFileSync } from "fs";
import { dirname, resolve } from "path";

import { PlotSpec, renderPlotFile } from "./plots.js";
import { SchemaError } from "./schema.js";

function main(): number {
  const specPath = process.argv[2];
  if (!specPath) {
    console.error("usage: plotkit <spec.json>");
    return 1;
  }
  let spec: PlotSpec;
  try {
    spec = JSON.parse(readFileSync(specPath, "utf8")) as PlotSpec;
  } catch (err) {
    console.error(`failed to read spec ${specPath}: ${(err as Error).message}`);
    return 1;
  }
  try {
    const out = renderPlotFile(spec, dirname(resolve(specPath)));
    console.log(out);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema error: ${err.message}`);
    } else {
      console.error(`plot failed: ${(err as Error).message}`);
    }
    return 1;
  }
}

process.exit(main());
