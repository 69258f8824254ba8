/**
 * FigureSpec execution: validate, build the full SVG in memory, then write it
 * in one shot.  A failed build leaves no partial file behind.
 */

import { mkdirSync, writeFileSync } from "fs";
import { dirname } from "path";

import { SchemaError } from "./csv.js";
import { FIGURE_KINDS, FigureSpec } from "./figures.js";

export function render(spec: FigureSpec): string {
  if (!spec || typeof spec.kind !== "string") {
    throw new SchemaError("figure spec: missing 'kind'");
  }
  const builder = FIGURE_KINDS[spec.kind];
  if (!builder) {
    throw new SchemaError(`figure spec: unknown kind '${spec.kind}' (have: ${Object.keys(FIGURE_KINDS).join(", ")})`);
  }
  if (!spec.out) {
    throw new SchemaError("figure spec: missing 'out'");
  }
  const svg = builder(spec);
  mkdirSync(dirname(spec.out), { recursive: true });
  writeFileSync(spec.out, svg, "utf-8");
  return spec.out;
}
