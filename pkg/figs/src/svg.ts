/**
 * Minimal deterministic SVG builder: fixed-precision coordinates, no
 * timestamps, no randomness, so identical inputs give identical bytes.
 */

export interface Extent {
  lo: number;
  hi: number;
}

export function extent(values: number[], padFrac = 0.05): Extent {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (Number.isFinite(v)) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (!Number.isFinite(lo) || !Number.isFinite(hi)) {
    lo = 0;
    hi = 1;
  }
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const pad = (hi - lo) * padFrac;
  return { lo: lo - pad, hi: hi + pad };
}

const fmt = (x: number): string => (Object.is(x, -0) ? "0" : x.toFixed(2));

/** Round-ish tick positions covering an extent. */
export function ticks(e: Extent, n = 5): number[] {
  const span = e.hi - e.lo;
  const raw = span / n;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => span / s <= n + 1) ?? 10 * mag;
  const first = Math.ceil(e.lo / step) * step;
  const out: number[] = [];
  for (let t = first; t <= e.hi + 1e-12 * span; t += step) out.push(t);
  return out;
}

const tickLabel = (x: number): string => {
  if (x === 0) return "0";
  const a = Math.abs(x);
  if (Number.isInteger(x) && a < 1e6) return x.toString();
  if (a >= 1e5 || a < 0.01) return x.toExponential(1);
  return parseFloat(x.toPrecision(4)).toString();
};

export interface PanelBox {
  x: number;
  y: number;
  w: number;
  h: number;
}

export class SvgDoc {
  private parts: string[] = [];

  constructor(readonly width: number, readonly height: number) {
    this.parts.push(
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
      `<rect width="${width}" height="${height}" fill="white"/>`,
    );
  }

  raw(s: string): void {
    this.parts.push(s);
  }

  text(x: number, y: number, s: string, size = 11, anchor = "start", color = "#222"): void {
    this.parts.push(
      `<text x="${fmt(x)}" y="${fmt(y)}" font-size="${size}" text-anchor="${anchor}" fill="${color}">${escapeXml(s)}</text>`,
    );
  }

  render(): string {
    return this.parts.join("\n") + "\n</svg>\n";
  }
}

export function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export class Panel {
  constructor(
    readonly doc: SvgDoc,
    readonly box: PanelBox,
    readonly xe: Extent,
    readonly ye: Extent,
    readonly title: string,
    readonly xLabel: string,
    readonly yLabel: string,
    readonly logY = false,
  ) {
    doc.raw(
      `<rect x="${fmt(box.x)}" y="${fmt(box.y)}" width="${fmt(box.w)}" height="${fmt(box.h)}" fill="none" stroke="#888" stroke-width="1"/>`,
    );
    doc.text(box.x + box.w / 2, box.y - 6, title, 12, "middle");
    doc.text(box.x + box.w / 2, box.y + box.h + 30, xLabel, 11, "middle", "#444");
    doc.raw(
      `<text x="${fmt(box.x - 42)}" y="${fmt(box.y + box.h / 2)}" font-size="11" text-anchor="middle" fill="#444" transform="rotate(-90 ${fmt(box.x - 42)} ${fmt(box.y + box.h / 2)})">${escapeXml(yLabel)}</text>`,
    );
    for (const t of ticks(xe)) {
      const px = this.px(t);
      doc.raw(`<line x1="${fmt(px)}" y1="${fmt(box.y + box.h)}" x2="${fmt(px)}" y2="${fmt(box.y + box.h + 4)}" stroke="#888"/>`);
      doc.text(px, box.y + box.h + 16, tickLabel(t), 9, "middle", "#444");
    }
    for (const t of ticks(ye)) {
      const py = this.py(this.logY ? Math.pow(10, t) : t);
      doc.raw(`<line x1="${fmt(box.x - 4)}" y1="${fmt(py)}" x2="${fmt(box.x)}" y2="${fmt(py)}" stroke="#888"/>`);
      doc.text(box.x - 6, py + 3, tickLabel(this.logY ? Math.pow(10, t) : t), 9, "end", "#444");
    }
  }

  px(x: number): number {
    return this.box.x + ((x - this.xe.lo) / (this.xe.hi - this.xe.lo)) * this.box.w;
  }

  py(y: number): number {
    const v = this.logY ? Math.log10(y) : y;
    return this.box.y + this.box.h - ((v - this.ye.lo) / (this.ye.hi - this.ye.lo)) * this.box.h;
  }

  polyline(xs: number[], ys: number[], color: string, width = 1.2, dash?: string): void {
    const pts: string[] = [];
    for (let i = 0; i < xs.length; i++) {
      if (!Number.isFinite(xs[i]) || !Number.isFinite(ys[i]) || (this.logY && ys[i] <= 0)) continue;
      pts.push(`${fmt(this.px(xs[i]))},${fmt(this.py(ys[i]))}`);
    }
    const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
    this.doc.raw(`<polyline points="${pts.join(" ")}" fill="none" stroke="${color}" stroke-width="${width}"${dashAttr}/>`);
  }

  dots(xs: number[], ys: number[], color: string, r = 2.2): void {
    for (let i = 0; i < xs.length; i++) {
      if (!Number.isFinite(xs[i]) || !Number.isFinite(ys[i]) || (this.logY && ys[i] <= 0)) continue;
      this.doc.raw(`<circle cx="${fmt(this.px(xs[i]))}" cy="${fmt(this.py(ys[i]))}" r="${r}" fill="${color}"/>`);
    }
  }

  stems(xs: number[], ys: number[], color: string): void {
    const y0 = this.py(0);
    for (let i = 0; i < xs.length; i++) {
      const px = fmt(this.px(xs[i]));
      this.doc.raw(`<line x1="${px}" y1="${fmt(y0)}" x2="${px}" y2="${fmt(this.py(ys[i]))}" stroke="${color}" stroke-width="1.5"/>`);
    }
    this.doc.raw(
      `<line x1="${fmt(this.box.x)}" y1="${fmt(y0)}" x2="${fmt(this.box.x + this.box.w)}" y2="${fmt(y0)}" stroke="#bbb" stroke-width="0.8"/>`,
    );
  }

  hline(y: number, color: string, dash = "4 3"): void {
    this.doc.raw(
      `<line x1="${fmt(this.box.x)}" y1="${fmt(this.py(y))}" x2="${fmt(this.box.x + this.box.w)}" y2="${fmt(this.py(y))}" stroke="${color}" stroke-dasharray="${dash}" stroke-width="1"/>`,
    );
  }

  legend(entries: { label: string; color: string }[]): void {
    let y = this.box.y + 14;
    for (const e of entries) {
      this.doc.raw(
        `<line x1="${fmt(this.box.x + this.box.w - 86)}" y1="${fmt(y - 3)}" x2="${fmt(this.box.x + this.box.w - 70)}" y2="${fmt(y - 3)}" stroke="${e.color}" stroke-width="2"/>`,
      );
      this.doc.text(this.box.x + this.box.w - 66, y, e.label, 9, "start", "#333");
      y += 13;
    }
  }
}

export const PALETTE = ["#1f6fb2", "#d1495b", "#3a9d5d", "#8d6cab", "#c98a2b", "#4b4b4b"];

/** Lay out a grid of panel boxes inside a document. */
export function panelGrid(ncols: number, nrows: number, panelW = 270, panelH = 170): { width: number; height: number; boxes: PanelBox[] } {
  const ml = 64;
  const mt = 34;
  const gx = 74;
  const gy = 62;
  const width = ml + ncols * panelW + (ncols - 1) * gx + 24;
  const height = mt + nrows * panelH + (nrows - 1) * gy + 46;
  const boxes: PanelBox[] = [];
  for (let r = 0; r < nrows; r++) {
    for (let c = 0; c < ncols; c++) {
      boxes.push({ x: ml + c * (panelW + gx), y: mt + r * (panelH + gy), w: panelW, h: panelH });
    }
  }
  return { width, height, boxes };
}
