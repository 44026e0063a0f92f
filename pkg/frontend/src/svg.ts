// Deterministic SVG plotting primitives.
//
// No charting library on purpose: the contract is byte-stable output for
// identical input CSVs, so every coordinate is rounded to 0.01 px, ticks
// are derived from the axis range alone, and elements appear in insertion
// order. Text uses the vendored DejaVu Sans face; the PNG rasterizer
// resolves only that file, never system fonts.

const FONT = "DejaVu Sans";

const r2 = (v: number): string => {
  const x = Math.round(v * 100) / 100;
  return Object.is(x, -0) ? "0" : String(x);
};

const esc = (s: string): string =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");

export interface LineStyle {
  stroke: string;
  width?: number;
  dash?: string; // stroke-dasharray, e.g. "6 3" dashed, "1.5 3" dotted
}

export interface AxisSpec {
  label: string;
  min: number;
  max: number;
  log?: boolean;
}

interface Scale {
  (v: number): number;
}

function makeScale(ax: AxisSpec, pxLo: number, pxHi: number): Scale {
  if (ax.log) {
    const lo = Math.log10(ax.min);
    const hi = Math.log10(ax.max);
    return (v) => pxLo + ((Math.log10(v) - lo) / (hi - lo)) * (pxHi - pxLo);
  }
  return (v) => pxLo + ((v - ax.min) / (ax.max - ax.min)) * (pxHi - pxLo);
}

/** Tick positions: 1-2-5 steps on linear axes, decades on log axes. */
export function ticks(ax: AxisSpec, target = 6): number[] {
  if (ax.log) {
    const lo = Math.ceil(Math.log10(ax.min) - 1e-9);
    const hi = Math.floor(Math.log10(ax.max) + 1e-9);
    const out: number[] = [];
    const every = Math.max(1, Math.ceil((hi - lo + 1) / (target + 2)));
    for (let e = lo; e <= hi; e += every) out.push(Math.pow(10, e));
    return out;
  }
  const span = ax.max - ax.min;
  const raw = span / target;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const norm = raw / mag;
  const step = (norm <= 1.5 ? 1 : norm <= 3.5 ? 2 : norm <= 7.5 ? 5 : 10) * mag;
  const out: number[] = [];
  for (let v = Math.ceil(ax.min / step - 1e-9) * step; v <= ax.max + 1e-9 * span; v += step) {
    out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return out;
}

function tickLabel(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) {
    const e = Math.floor(Math.log10(a) + 1e-9);
    const m = v / Math.pow(10, e);
    const ms = Math.abs(m - 1) < 1e-9 ? "" : `${Number(m.toPrecision(3))}·`;
    return `${ms}10${sup(e)}`;
  }
  return String(Number(v.toPrecision(6)));
}

const SUP: Record<string, string> = {
  "0": "⁰", "1": "¹", "2": "²", "3": "³", "4": "⁴",
  "5": "⁵", "6": "⁶", "7": "⁷", "8": "⁸", "9": "⁹",
  "-": "⁻",
};

const sup = (e: number): string => String(e).split("").map((c) => SUP[c] ?? c).join("");

export interface PlotOptions {
  width?: number;
  height?: number;
  title?: string;
  x: AxisSpec;
  y: AxisSpec;
}

export interface LegendEntry {
  label: string;
  style: LineStyle;
  marker?: boolean;
}

/**
 * One framed panel. Data-space geometry goes in through line/dots/hline/
 * vline; everything is clipped to the frame. The root element records the
 * axis ranges as data- attributes so tests can recompute pixel positions.
 */
export class Plot {
  private readonly w: number;
  private readonly h: number;
  private readonly mL = 64;
  private readonly mR = 16;
  private readonly mT: number;
  private readonly mB = 48;
  private readonly sx: Scale;
  private readonly sy: Scale;
  private readonly body: string[] = [];

  constructor(private readonly opts: PlotOptions) {
    this.w = opts.width ?? 640;
    this.h = opts.height ?? 440;
    this.mT = opts.title ? 34 : 14;
    this.sx = makeScale(opts.x, this.mL, this.w - this.mR);
    this.sy = makeScale(opts.y, this.h - this.mB, this.mT);
  }

  xPx(v: number): number {
    return this.sx(v);
  }

  yPx(v: number): number {
    return this.sy(v);
  }

  private strokeAttrs(st: LineStyle): string {
    const dash = st.dash ? ` stroke-dasharray="${st.dash}"` : "";
    return `stroke="${st.stroke}" stroke-width="${st.width ?? 1.5}" fill="none"${dash}`;
  }

  private extra(attrs?: Record<string, string>): string {
    if (!attrs) return "";
    return Object.entries(attrs)
      .map(([k, v]) => ` ${k}="${esc(v)}"`)
      .join("");
  }

  /** Polyline through the finite points; non-finite samples split the path. */
  line(xs: number[], ys: number[], st: LineStyle, attrs?: Record<string, string>): void {
    const segs: string[] = [];
    let pen = false;
    for (let i = 0; i < xs.length; i++) {
      const x = xs[i];
      const y = ys[i];
      const ok =
        Number.isFinite(x) && Number.isFinite(y) &&
        (!this.opts.x.log || x > 0) && (!this.opts.y.log || y > 0);
      if (!ok) {
        pen = false;
        continue;
      }
      segs.push(`${pen ? "L" : "M"}${r2(this.sx(x))} ${r2(this.sy(y))}`);
      pen = true;
    }
    if (segs.length === 0) return;
    this.body.push(`<path d="${segs.join(" ")}" ${this.strokeAttrs(st)} clip-path="url(#frame)"${this.extra(attrs)}/>`);
  }

  hline(y: number, st: LineStyle, attrs?: Record<string, string>, x0?: number, x1?: number): void {
    const xa = this.sx(x0 ?? this.opts.x.min);
    const xb = this.sx(x1 ?? this.opts.x.max);
    this.body.push(
      `<line x1="${r2(xa)}" y1="${r2(this.sy(y))}" x2="${r2(xb)}" y2="${r2(this.sy(y))}" ` +
      `${this.strokeAttrs(st)} clip-path="url(#frame)"${this.extra(attrs)}/>`,
    );
  }

  vline(x: number, st: LineStyle, attrs?: Record<string, string>): void {
    const xp = r2(this.sx(x));
    this.body.push(
      `<line x1="${xp}" y1="${r2(this.mT)}" x2="${xp}" y2="${r2(this.h - this.mB)}" ` +
      `${this.strokeAttrs(st)} clip-path="url(#frame)"${this.extra(attrs)}/>`,
    );
  }

  dots(xs: number[], ys: number[], fill: string, radius = 3.5, attrs?: Record<string, string>): void {
    for (let i = 0; i < xs.length; i++) {
      if (!Number.isFinite(xs[i]) || !Number.isFinite(ys[i])) continue;
      this.body.push(
        `<circle cx="${r2(this.sx(xs[i]))}" cy="${r2(this.sy(ys[i]))}" r="${radius}" ` +
        `fill="${fill}" clip-path="url(#frame)"${this.extra(attrs)}/>`,
      );
    }
  }

  text(x: number, y: number, s: string, size = 12, anchor = "start", fill = "#333333"): void {
    this.body.push(
      `<text x="${r2(this.sx(x))}" y="${r2(this.sy(y))}" font-family="${FONT}" ` +
      `font-size="${size}" text-anchor="${anchor}" fill="${fill}">${esc(s)}</text>`,
    );
  }

  legend(entries: LegendEntry[], corner: "tl" | "tr" | "bl" | "br" = "tr"): void {
    const lineH = 17;
    const boxW = 10 + 26 + 6 + 13 * Math.max(...entries.map((e) => e.label.length)) * 0.52 + 8;
    const boxH = entries.length * lineH + 8;
    const x0 = corner.endsWith("l") ? this.mL + 10 : this.w - this.mR - 10 - boxW;
    const y0 = corner.startsWith("t") ? this.mT + 10 : this.h - this.mB - 10 - boxH;
    const parts = [
      `<rect x="${r2(x0)}" y="${r2(y0)}" width="${r2(boxW)}" height="${r2(boxH)}" ` +
      `fill="white" fill-opacity="0.85" stroke="#cccccc" stroke-width="0.8"/>`,
    ];
    entries.forEach((e, i) => {
      const yc = y0 + 4 + lineH * i + lineH / 2;
      if (e.marker) {
        parts.push(`<circle cx="${r2(x0 + 23)}" cy="${r2(yc)}" r="3.5" fill="${e.style.stroke}"/>`);
      } else {
        const dash = e.style.dash ? ` stroke-dasharray="${e.style.dash}"` : "";
        parts.push(
          `<line x1="${r2(x0 + 10)}" y1="${r2(yc)}" x2="${r2(x0 + 36)}" y2="${r2(yc)}" ` +
          `stroke="${e.style.stroke}" stroke-width="${e.style.width ?? 1.5}"${dash}/>`,
        );
      }
      parts.push(
        `<text x="${r2(x0 + 42)}" y="${r2(yc + 4)}" font-family="${FONT}" font-size="12" ` +
        `fill="#333333">${esc(e.label)}</text>`,
      );
    });
    this.body.push(...parts);
  }

  private frame(): string {
    const { x, y } = this.opts;
    const xTicks = ticks(x);
    const yTicks = ticks(y);
    const top = this.mT;
    const bot = this.h - this.mB;
    const left = this.mL;
    const right = this.w - this.mR;
    const parts: string[] = [];
    parts.push(`<rect x="${left}" y="${top}" width="${right - left}" height="${bot - top}" fill="none" stroke="#444444" stroke-width="1"/>`);
    for (const t of xTicks) {
      if (t < x.min - 1e-12 || t > x.max + 1e-12) continue;
      const xp = r2(this.sx(t));
      parts.push(`<line x1="${xp}" y1="${bot}" x2="${xp}" y2="${bot + 5}" stroke="#444444" stroke-width="1"/>`);
      parts.push(`<text x="${xp}" y="${bot + 19}" font-family="${FONT}" font-size="12" text-anchor="middle" fill="#333333">${esc(tickLabel(t))}</text>`);
    }
    for (const t of yTicks) {
      if (t < y.min - 1e-12 || t > y.max + 1e-12) continue;
      const yp = r2(this.sy(t));
      parts.push(`<line x1="${left - 5}" y1="${yp}" x2="${left}" y2="${yp}" stroke="#444444" stroke-width="1"/>`);
      parts.push(`<text x="${left - 8}" y="${r2(this.sy(t) + 4)}" font-family="${FONT}" font-size="12" text-anchor="end" fill="#333333">${esc(tickLabel(t))}</text>`);
    }
    parts.push(`<text x="${r2((left + right) / 2)}" y="${this.h - 10}" font-family="${FONT}" font-size="13" text-anchor="middle" fill="#111111">${esc(x.label)}</text>`);
    parts.push(`<text x="17" y="${r2((top + bot) / 2)}" font-family="${FONT}" font-size="13" text-anchor="middle" fill="#111111" transform="rotate(-90 17 ${r2((top + bot) / 2)})">${esc(y.label)}</text>`);
    if (this.opts.title) {
      parts.push(`<text x="${r2((left + right) / 2)}" y="22" font-family="${FONT}" font-size="14" text-anchor="middle" fill="#111111">${esc(this.opts.title)}</text>`);
    }
    return parts.join("\n");
  }

  svg(): string {
    const { x, y } = this.opts;
    const head =
      `<svg xmlns="http://www.w3.org/2000/svg" width="${this.w}" height="${this.h}" ` +
      `viewBox="0 0 ${this.w} ${this.h}" data-x-min="${x.min}" data-x-max="${x.max}" ` +
      `data-y-min="${y.min}" data-y-max="${y.max}" data-x-log="${x.log ? 1 : 0}" ` +
      `data-y-log="${y.log ? 1 : 0}" data-frame="${this.mL} ${this.mT} ${this.w - this.mR} ${this.h - this.mB}">`;
    const defs =
      `<defs><clipPath id="frame"><rect x="${this.mL}" y="${this.mT}" ` +
      `width="${this.w - this.mR - this.mL}" height="${this.h - this.mB - this.mT}"/></clipPath></defs>`;
    const bg = `<rect width="${this.w}" height="${this.h}" fill="white"/>`;
    return [head, defs, bg, this.frame(), ...this.body, "</svg>"].join("\n") + "\n";
  }
}
