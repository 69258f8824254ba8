/**
 * Command line: render one figure from a JSON spec, or from inline flags.
 *
 *   node dist/src/main.js spec.json
 *   node dist/src/main.js --kind traceplot_acf --in trace=trace.csv --in acf=acf.csv --out fig.svg
 */

import { readFileSync } from "fs";

import { SchemaError } from "./csv.js";
import { FigureSpec } from "./figures.js";
import { render } from "./render.js";

function parseArgs(argv: string[]): FigureSpec {
  if (argv.length === 1 && !argv[0].startsWith("--")) {
    const raw = JSON.parse(readFileSync(argv[0], "utf-8"));
    return raw as FigureSpec;
  }
  const spec: FigureSpec = { kind: "", inputs: {}, out: "" };
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    if (a === "--kind") spec.kind = argv[++i];
    else if (a === "--out") spec.out = argv[++i];
    else if (a === "--title") spec.title = argv[++i];
    else if (a === "--in") {
      const kv = argv[++i];
      const eq = kv.indexOf("=");
      if (eq <= 0) throw new SchemaError(`--in expects name=path, got '${kv}'`);
      spec.inputs[kv.slice(0, eq)] = kv.slice(eq + 1);
    } else {
      throw new SchemaError(`unknown argument '${a}'`);
    }
  }
  return spec;
}

try {
  const spec = parseArgs(process.argv.slice(2));
  const out = render(spec);
  process.stdout.write(`wrote ${out}\n`);
} catch (err) {
  if (err instanceof SchemaError) {
    process.stderr.write(`figure error: ${err.message}\n`);
    process.exit(2);
  }
  throw err;
}
