import assert from "node:assert/strict";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { test } from "node:test";

import { numericColumn, parseCsv, SchemaError } from "../src/csv.js";

const FX = join(process.cwd(), "tests", "fixtures");

test("parses schema line, meta and rows", () => {
  const t = parseCsv(join(FX, "trace.csv"), "trace");
  assert.equal(t.kind, "trace");
  assert.equal(t.meta.sampler, "sps");
  assert.ok(t.columns.includes("x_1"));
  assert.equal(t.rows.length, 400);
  const x1 = numericColumn(t, "x_1");
  assert.ok(x1.every((v) => Number.isFinite(v)));
});

test("rejects a wrong kind", () => {
  assert.throws(() => parseCsv(join(FX, "trace.csv"), "events"), SchemaError);
});

test("rejects a file without the schema comment", () => {
  const dir = mkdtempSync(join(tmpdir(), "figs-"));
  const p = join(dir, "plain.csv");
  writeFileSync(p, "a,b\n1,2\n");
  assert.throws(() => parseCsv(p), SchemaError);
});

test("missing column error names the column", () => {
  const t = parseCsv(join(FX, "trace.csv"));
  assert.throws(
    () => numericColumn(t, "nonexistent", "trace.csv"),
    (e: Error) => e instanceof SchemaError && e.message.includes("'nonexistent'"),
  );
});

test("ragged rows are rejected with a line number", () => {
  const dir = mkdtempSync(join(tmpdir(), "figs-"));
  const p = join(dir, "ragged.csv");
  writeFileSync(p, "# stereomc-csv v1 kind=trace\na,b\n1,2\n3\n");
  assert.throws(
    () => parseCsv(p),
    (e: Error) => e instanceof SchemaError && e.message.includes(":4:"),
  );
});
