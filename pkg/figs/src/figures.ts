/**
 * Figure builders.  Every plotted number is read verbatim from a stereomc
 * CSV; nothing is recomputed here beyond axis scaling.
 */

import { CsvTable, numericColumn, parseCsv, requireRows, SchemaError, stringColumn } from "./csv.js";
import { extent, Panel, panelGrid, PALETTE, SvgDoc } from "./svg.js";

export interface FigureSpec {
  kind: string;
  inputs: Record<string, string>;
  out: string;
  title?: string;
}

function need(spec: FigureSpec, key: string): string {
  const p = spec.inputs[key];
  if (!p) throw new SchemaError(`figure spec: missing input '${key}'`);
  return p;
}

function load(path: string, kind: string): CsvTable {
  const t = parseCsv(path, kind);
  requireRows(t, path);
  return t;
}

/** Traceplots of coordinate 1 and squared norm with their ACF panels. */
export function traceplotAcf(spec: FigureSpec): string {
  const tracePath = need(spec, "trace");
  const acfPath = need(spec, "acf");
  const trace = load(tracePath, "trace");
  const acf = load(acfPath, "acf");

  const steps = numericColumn(trace, "step", tracePath);
  const x1 = numericColumn(trace, "x_1", tracePath);
  const norm = numericColumn(trace, "norm_sq", tracePath);
  const lags = numericColumn(acf, "lag", acfPath);
  const acfCols = acf.columns.filter((c) => c !== "lag").slice(0, 2);
  if (acfCols.length === 0) throw new SchemaError(`${acfPath}: no observable columns`);

  const grid = panelGrid(2, 2);
  const doc = new SvgDoc(grid.width, grid.height);
  doc.text(grid.width / 2, 16, spec.title ?? `trace and autocorrelation (${trace.meta.sampler ?? "run"})`, 13, "middle");

  const p1 = new Panel(doc, grid.boxes[0], extent(steps, 0), extent(x1), "coordinate 1", "step", "x_1");
  p1.polyline(steps, x1, PALETTE[0], 1.0);

  const a1 = new Panel(doc, grid.boxes[1], extent(lags, 0), extent([-0.3, 1.0], 0), `ACF: ${acfCols[0]}`, "lag", "acf");
  a1.stems(lags, numericColumn(acf, acfCols[0], acfPath), PALETTE[0]);

  const p2 = new Panel(doc, grid.boxes[2], extent(steps, 0), extent(norm), "squared norm", "step", "|x|^2");
  p2.polyline(steps, norm, PALETTE[1], 1.0);

  const secondAcf = acfCols[1] ?? acfCols[0];
  const a2 = new Panel(doc, grid.boxes[3], extent(lags, 0), extent([-0.3, 1.0], 0), `ACF: ${secondAcf}`, "lag", "acf");
  a2.stems(lags, numericColumn(acf, secondAcf, acfPath), PALETTE[1]);

  return doc.render();
}

/** ESJD-per-dimension vs acceptance rate, one panel per radius multiplier. */
export function efficiencyCurves(spec: FigureSpec): string {
  const path = need(spec, "sweep");
  const table = load(path, "esjd_sweep");
  const mult = numericColumn(table, "R_multiplier", path);
  const acc = numericColumn(table, "acceptance_rate", path);
  const esjd = numericColumn(table, "esjd_per_dim", path);
  const multipliers = [...new Set(mult)].sort((a, b) => a - b);

  const ncols = Math.min(2, multipliers.length);
  const nrows = Math.ceil(multipliers.length / ncols);
  const grid = panelGrid(ncols, nrows);
  const doc = new SvgDoc(grid.width, grid.height);
  doc.text(grid.width / 2, 16, spec.title ?? "efficiency curves", 13, "middle");

  multipliers.forEach((m, i) => {
    const idx = mult.map((v, j) => (v === m ? j : -1)).filter((j) => j >= 0);
    const pairs = idx.map((j) => [acc[j], esjd[j]] as const).sort((a, b) => a[0] - b[0]);
    const xs = pairs.map((p) => p[0]);
    const ys = pairs.map((p) => p[1]);
    const panel = new Panel(
      doc,
      grid.boxes[i],
      extent([0, 1], 0),
      extent(ys),
      `R = ${m} sqrt(d)`,
      "acceptance rate",
      "ESJD / d",
    );
    panel.polyline(xs, ys, PALETTE[i % PALETTE.length], 1.2);
    panel.dots(xs, ys, PALETTE[i % PALETTE.length]);
    panel.doc.raw(
      `<line x1="${panel.px(0.234).toFixed(2)}" y1="${(panel.box.y).toFixed(2)}" x2="${panel.px(0.234).toFixed(2)}" y2="${(panel.box.y + panel.box.h).toFixed(2)}" stroke="#999" stroke-dasharray="4 3"/>`,
    );
  });
  return doc.render();
}

/** Refresh fraction plus log ESS-per-switch against refresh rate, per observable. */
export function essCurves(spec: FigureSpec): string {
  const path = need(spec, "curve");
  const table = load(path, "ess_curve");
  const sampler = stringColumn(table, "sampler", path);
  const rate = numericColumn(table, "refresh_rate", path);
  const obs = stringColumn(table, "observable", path);
  const eps = numericColumn(table, "ess_per_switch", path);
  const frac = numericColumn(table, "refresh_fraction", path);
  const observables = [...new Set(obs)];
  const samplers = [...new Set(sampler)];

  const grid = panelGrid(2, Math.ceil((observables.length + 1) / 2));
  const doc = new SvgDoc(grid.width, grid.height);
  doc.text(grid.width / 2, 16, spec.title ?? "ESS per switch vs refresh rate", 13, "middle");

  const rates = [...new Set(rate)].sort((a, b) => a - b);
  const fracPanel = new Panel(
    doc,
    grid.boxes[0],
    extent(rates),
    extent([0, 1], 0),
    "refresh fraction",
    "refresh rate",
    "fraction",
  );
  samplers.forEach((s, si) => {
    const pairs = rates.map((r) => {
      const j = sampler.findIndex((v, k) => v === s && rate[k] === r);
      return j >= 0 ? frac[j] : NaN;
    });
    fracPanel.polyline(rates, pairs, PALETTE[si]);
    fracPanel.dots(rates, pairs, PALETTE[si]);
  });
  fracPanel.legend(samplers.map((s, si) => ({ label: s, color: PALETTE[si] })));

  observables.forEach((o, oi) => {
    const ys = eps.filter((_, j) => obs[j] === o);
    const logExtent = extent(ys.filter((y) => y > 0).map((y) => Math.log10(y)));
    const panel = new Panel(
      doc,
      grid.boxes[oi + 1],
      extent(rates),
      logExtent,
      o,
      "refresh rate",
      "ESS per switch",
      true,
    );
    samplers.forEach((s, si) => {
      const series = rates.map((r) => {
        const j = sampler.findIndex((v, k) => v === s && rate[k] === r && obs[k] === o);
        return j >= 0 ? eps[j] : NaN;
      });
      panel.polyline(rates, series, PALETTE[si]);
      panel.dots(rates, series, PALETTE[si]);
    });
    panel.hline(1.0, "#999");
    panel.legend(samplers.map((s, si) => ({ label: s, color: PALETTE[si] })));
  });
  return doc.render();
}

/** Observed proposal-latitude walk next to its closed-form approximations. */
export function latitudePanels(spec: FigureSpec): string {
  const path = need(spec, "latitudes");
  const table = load(path, "latitude_compare");
  const steps = numericColumn(table, "step", path);
  const series = table.columns.filter((c) => c !== "step");
  if (series.length === 0) throw new SchemaError(`${path}: no latitude columns`);

  const grid = panelGrid(2, Math.ceil(series.length / 2));
  const doc = new SvgDoc(grid.width, grid.height);
  doc.text(grid.width / 2, 16, spec.title ?? "proposal latitude: observed vs approximations", 13, "middle");
  series.forEach((name, i) => {
    const p = new Panel(doc, grid.boxes[i], extent(steps, 0), extent([-1, 1], 0.02), name, "step", "latitude");
    p.polyline(steps, numericColumn(table, name, path), PALETTE[i % PALETTE.length], 1.0);
    p.hline(0, "#bbb");
  });
  return doc.render();
}

/** Family of latitude profile functions g_k. */
export function gkFamily(spec: FigureSpec): string {
  const path = need(spec, "gk");
  const table = load(path, "gk");
  const z = numericColumn(table, "z", path);
  const curves = table.columns.filter((c) => c !== "z");
  if (curves.length === 0) throw new SchemaError(`${path}: no g_k columns`);

  const grid = panelGrid(1, 1, 430, 300);
  const doc = new SvgDoc(grid.width, grid.height);
  doc.text(grid.width / 2, 16, spec.title ?? "latitude profile g_k", 13, "middle");
  const all: number[] = [];
  const data = curves.map((c) => numericColumn(table, c, path));
  for (const col of data) for (const v of col) if (Number.isFinite(v) && Math.abs(v) < 50) all.push(v);
  const p = new Panel(doc, grid.boxes[0], extent([-1, 1], 0.02), extent(all), "", "latitude z", "g_k(z)");
  curves.forEach((c, i) => p.polyline(z, data[i], PALETTE[i % PALETTE.length], 1.3));
  p.legend(curves.map((c, i) => ({ label: c, color: PALETTE[i % PALETTE.length] })));
  return doc.render();
}

export const FIGURE_KINDS: Record<string, (spec: FigureSpec) => string> = {
  traceplot_acf: traceplotAcf,
  efficiency: efficiencyCurves,
  ess_curve: essCurves,
  latitude: latitudePanels,
  gk: gkFamily,
};
