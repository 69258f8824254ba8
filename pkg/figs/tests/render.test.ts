import assert from "node:assert/strict";
import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { test } from "node:test";

import { SchemaError } from "../src/csv.js";
import { FIGURE_KINDS } from "../src/figures.js";
import { render } from "../src/render.js";

const FX = join(process.cwd(), "tests", "fixtures");

function outDir(): string {
  return mkdtempSync(join(tmpdir(), "figs-out-"));
}

test("traceplot+ACF figure renders four panels deterministically", () => {
  const dir = outDir();
  const spec = {
    kind: "traceplot_acf",
    inputs: { trace: join(FX, "trace.csv"), acf: join(FX, "acf.csv") },
    out: join(dir, "a.svg"),
  };
  render(spec);
  const first = readFileSync(spec.out);
  render({ ...spec, out: join(dir, "b.svg") });
  const second = readFileSync(join(dir, "b.svg"));
  assert.ok(first.equals(second), "re-render must be byte-identical");
  const svg = first.toString();
  assert.ok(svg.startsWith("<svg"));
  assert.equal((svg.match(/<rect x=/g) ?? []).length, 4, "four panel frames");
  assert.ok(svg.includes("ACF"));
});

test("ess-curve figure renders every sampler and observable", () => {
  const dir = outDir();
  const spec = {
    kind: "ess_curve",
    inputs: { curve: join(FX, "ess_curve.csv") },
    out: join(dir, "ess.svg"),
  };
  render(spec);
  const svg = readFileSync(spec.out, "utf-8");
  assert.ok(svg.includes("refresh fraction"));
  assert.ok(svg.includes("first_coordinate"));
  assert.ok(svg.includes("sbps") && svg.includes("bps"));
  const again = join(dir, "ess2.svg");
  render({ ...spec, out: again });
  assert.ok(readFileSync(spec.out).equals(readFileSync(again)));
});

test("efficiency figure renders one panel per radius multiplier", () => {
  const dir = outDir();
  const spec = {
    kind: "efficiency",
    inputs: { sweep: join(FX, "efficiency.csv") },
    out: join(dir, "eff.svg"),
  };
  render(spec);
  const svg = readFileSync(spec.out, "utf-8");
  assert.ok(svg.includes("R = 0.5 sqrt(d)"));
  assert.ok(svg.includes("R = 2 sqrt(d)"));
});

test("latitude and gk figures render", () => {
  const dir = outDir();
  render({ kind: "latitude", inputs: { latitudes: join(FX, "latitude_compare.csv") }, out: join(dir, "lat.svg") });
  assert.ok(readFileSync(join(dir, "lat.svg"), "utf-8").includes("transient"));
  render({ kind: "gk", inputs: { gk: join(FX, "gk.csv") }, out: join(dir, "gk.svg") });
  assert.ok(readFileSync(join(dir, "gk.svg"), "utf-8").includes("g_1"));
});

test("empty CSV fails and leaves no partial file", () => {
  const dir = outDir();
  const empty = join(dir, "empty.csv");
  writeFileSync(empty, "# stereomc-csv v1 kind=trace\nstep,x_1,norm_sq,latitude,accepted,log_ratio\n");
  const out = join(dir, "nope.svg");
  assert.throws(
    () => render({ kind: "traceplot_acf", inputs: { trace: empty, acf: join(FX, "acf.csv") }, out }),
    (e: Error) => e instanceof SchemaError && e.message.includes("no data rows"),
  );
  assert.ok(!existsSync(out), "no partial output file");
});

test("missing column is reported with the column name", () => {
  const dir = outDir();
  const bad = join(dir, "bad.csv");
  writeFileSync(bad, "# stereomc-csv v1 kind=trace\nstep,latitude\n1,0.5\n");
  assert.throws(
    () => render({ kind: "traceplot_acf", inputs: { trace: bad, acf: join(FX, "acf.csv") }, out: join(dir, "x.svg") }),
    (e: Error) => e instanceof SchemaError && e.message.includes("'x_1'"),
  );
});

test("unknown figure kind is rejected", () => {
  assert.throws(
    () => render({ kind: "heatmap", inputs: {}, out: "x.svg" }),
    (e: Error) => e instanceof SchemaError && e.message.includes("unknown kind"),
  );
  assert.ok(Object.keys(FIGURE_KINDS).length === 5);
});
