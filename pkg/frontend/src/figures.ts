// Figure builders: one function per figure id, CSV run directory in,
// SVG string out. No physics here; every number is read from the run's
// files, except the reference overlays (diagonal, thermal asymptote,
// photon-statistics limit constants), which are part of the figure
// definition and carry data-overlay attributes so tests can check them.

import { Manifest, Table, csvNames, readCsv, readManifest, RunDirError } from "./csv.js";
import { LegendEntry, LineStyle, Plot } from "./svg.js";

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const GRAY: LineStyle = { stroke: "#888888", width: 1.2, dash: "5 4" };
const DOTTED: LineStyle = { stroke: "#444444", width: 1.4, dash: "2 4" };

export const THETA_SQ_ASYMPTOTE = 0.699; // thermal-state <Theta^2> at twice threshold
export const G2_BELOW = 3.0;
export const G2_ABOVE = 1.0;
export const G2_AT_THRESHOLD = 2.1884; // universal crossing value of g2(0)

function extent(vals: number[], positiveOnly = false): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of vals) {
    if (!Number.isFinite(v)) continue;
    if (positiveOnly && v <= 0) continue;
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!(lo <= hi)) throw new RunDirError("no finite data to plot");
  return [lo, hi];
}

const padLin = (lo: number, hi: number, f = 0.06): [number, number] => {
  const span = hi - lo || Math.abs(hi) || 1;
  return [lo - f * span, hi + f * span];
};

const padLog = (lo: number, hi: number, f = 1.6): [number, number] => [lo / f, hi * f];

/** Undo the file-name encoding of sweep values ("1p5" -> 1.5, "0p8" -> 0.8). */
function sweepValue(name: string, prefix: string): { label: string; value: number } {
  const core = name.slice(prefix.length, name.length - ".csv".length);
  const label = core.replace(/p/g, ".").replace(/m/g, "-");
  return { label, value: Number(label) };
}

function interpY(xs: number[], ys: number[], x: number): number {
  for (let i = 1; i < xs.length; i++) {
    if (xs[i - 1] <= x && x <= xs[i] && xs[i] > xs[i - 1]) {
      const w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
      return ys[i - 1] + w * (ys[i] - ys[i - 1]);
    }
  }
  return NaN;
}

// -- fig 2: graphical solution of the order-parameter self-consistency ----

function fig2(runDir: string, manifest: Manifest): string {
  const map = readCsv(runDir, "map.csv", manifest);
  const fp = readCsv(runDir, "fixed_points.csv", manifest);
  const zeta = map.col("zeta");
  const qCols = map.columns.filter((c) => c.startsWith("q_r"));
  const plot = new Plot({
    title: "Order-parameter self-consistency map",
    x: { label: "ζ", min: 0, max: 1 },
    y: { label: "q", min: 0, max: 1 },
  });
  // the diagonal q = zeta; intersections are the fixed points
  plot.line([0, 1], [0, 1], GRAY, { "data-overlay": "diagonal" });
  const legend: LegendEntry[] = [];
  qCols.forEach((c, i) => {
    const { label } = sweepValue(c + ".csv", "q_r");
    const style = { stroke: PALETTE[i % PALETTE.length] };
    plot.line(zeta, map.col(c), style, { "data-series": c });
    legend.push({ label: `r = ${label}`, style });
  });
  const tb = fp.col("theta_bar");
  plot.dots(tb, tb, "#111111", 4, { "data-role": "fixed-point" });
  legend.push({ label: "fixed points", style: { stroke: "#111111" }, marker: true });
  plot.legend(legend, "br");
  return plot.svg();
}

// -- fig 3: order parameter after a quench above threshold ----------------

function fig3(runDir: string, manifest: Manifest): string {
  const names = csvNames(manifest, "quench_r");
  if (names.length === 0) throw new RunDirError("no quench_r*.csv files in run");
  const series = names
    .map((n) => ({ ...sweepValue(n, "quench_r"), table: readCsv(runDir, n, manifest) }))
    .sort((a, b) => a.value - b.value);
  const allT: number[] = [];
  const allTh: number[] = [];
  for (const s of series) {
    allT.push(...s.table.col("t"));
    allTh.push(...s.table.col("theta").map(Math.abs));
  }
  const [tLo, tHi] = extent(allT);
  let [yLo, yHi] = extent(allTh, true);
  yLo = Math.max(yLo, yHi * 1e-8);
  const plot = new Plot({
    title: "Violent relaxation after a quench",
    x: { label: "κt", min: tLo, max: tHi },
    y: { label: "|Θ|", min: padLog(yLo, yHi)[0], max: padLog(yLo, yHi)[1], log: true },
  });
  const legend: LegendEntry[] = [];
  series.forEach((s, i) => {
    const style = { stroke: PALETTE[i % PALETTE.length] };
    plot.line(s.table.col("t"), s.table.col("theta").map(Math.abs), style, {
      "data-series": `r-${s.label}`,
    });
    legend.push({ label: `r = ${s.label}`, style });
  });
  plot.legend(legend, "br");
  return plot.svg();
}

// -- fig 4: initial growth rate versus pump strength ----------------------

function fig4(runDir: string, manifest: Manifest): string {
  const growth = readCsv(runDir, "growth.csv", manifest);
  const fits = readCsv(runDir, "fits.csv", manifest);
  const r = growth.col("r");
  const full = growth.col("gamma_full");
  const approx = growth.col("gamma_approx");
  const [rLo, rHi] = extent(r);
  const [gLo, gHi] = extent([...full, ...approx, ...fits.col("gamma_fit"), 0]);
  const [yLo, yHi] = padLin(gLo, gHi);
  const plot = new Plot({
    title: "Instability growth rate above threshold",
    x: { label: "pump ratio r", min: rLo, max: rHi },
    y: { label: "γ/κ", min: yLo, max: yHi },
  });
  plot.hline(0, { stroke: "#bbbbbb", width: 1 });
  const cFull = { stroke: PALETTE[0], width: 1.8 };
  const cApprox = { stroke: PALETTE[1], width: 1.6, dash: "6 4" };
  plot.line(r, full, cFull, { "data-series": "gamma-full" });
  plot.line(r, approx, cApprox, { "data-series": "gamma-approx" });
  plot.dots(fits.col("r"), fits.col("gamma_fit"), "#111111", 4, { "data-role": "fit" });
  plot.legend(
    [
      { label: "dispersion root", style: cFull },
      { label: "strong-damping form", style: cApprox },
      { label: "fit to quench", style: { stroke: "#111111" }, marker: true },
    ],
    "tl",
  );
  return plot.svg();
}

// -- fig 5: spectrum of the stationary order-parameter fluctuations -------

function fig5(runDir: string, manifest: Manifest): string {
  const names = csvNames(manifest, "spectrum_r");
  if (names.length === 0) throw new RunDirError("no spectrum_r*.csv files in run");
  const peaks = readCsv(runDir, "peaks.csv", manifest);
  const series = names
    .map((n) => ({ ...sweepValue(n, "spectrum_r"), table: readCsv(runDir, n, manifest) }))
    .sort((a, b) => a.value - b.value);
  const allW: number[] = [];
  const allS: number[] = [];
  for (const s of series) {
    allW.push(...s.table.col("omega"));
    allS.push(...s.table.col("s_omega"));
  }
  const [wLo, wHi] = extent(allW);
  let [sLo, sHi] = extent(allS, true);
  sLo = Math.max(sLo, sHi * 1e-7);
  const plot = new Plot({
    title: "Order-parameter spectrum and pendulum prediction",
    x: { label: "ω/κ", min: wLo, max: wHi },
    y: { label: "S(ω)", min: padLog(sLo, sHi)[0], max: padLog(sLo, sHi)[1], log: true },
  });
  const peakR = peaks.col("r");
  const peakW = peaks.col("peak_omega");
  const predW = peaks.col("omega_signal_mean");
  const legend: LegendEntry[] = [];
  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const omega = s.table.col("omega");
    const sw = s.table.col("s_omega");
    plot.line(omega, sw, { stroke: color }, { "data-series": `r-${s.label}` });
    const k = peakR.findIndex((v) => Math.abs(v - s.value) < 1e-9);
    if (k >= 0) {
      plot.vline(predW[k], { stroke: color, width: 1.2, dash: "5 4" }, {
        "data-role": "pendulum-prediction",
        "data-r": s.label,
      });
      plot.dots([peakW[k]], [interpY(omega, sw, peakW[k])], color, 4, {
        "data-role": "measured-peak",
        "data-r": s.label,
      });
    }
    legend.push({ label: `r = ${s.label}`, style: { stroke: color } });
  });
  legend.push({ label: "pendulum mean", style: GRAY });
  plot.legend(legend, "tr");
  return plot.svg();
}

// -- fig 7: relaxation to the thermal state, particles vs mean field ------

function fig7(runDir: string, manifest: Manifest): string {
  const nbNames = csvNames(manifest, "nbody_n");
  if (nbNames.length === 0) throw new RunDirError("no nbody_n*.csv files in run");
  const groups = nbNames
    .map((n) => sweepValue(n, "nbody_n"))
    .sort((a, b) => a.value - b.value);
  const allT: number[] = [];
  const allY: number[] = [];
  const curves: { label: string; nb: Table; mf: Table }[] = [];
  for (const g of groups) {
    const nb = readCsv(runDir, `nbody_n${g.label}.csv`, manifest);
    const mf = readCsv(runDir, `meanfield_n${g.label}.csv`, manifest);
    curves.push({ label: g.label, nb, mf });
    allT.push(...nb.col("t"), ...mf.col("t"));
    allY.push(...nb.col("theta_sq_mean"), ...mf.col("theta_sq"));
  }
  const [tLo, tHi] = extent(allT, true);
  const [yLo, yHi] = padLin(0, Math.max(extent(allY)[1], THETA_SQ_ASYMPTOTE));
  const plot = new Plot({
    title: "Thermalization of the squared order parameter",
    x: { label: "κt", min: tLo, max: tHi, log: true },
    y: { label: "Θ² (ensemble mean)", min: yLo, max: yHi },
  });
  plot.hline(THETA_SQ_ASYMPTOTE, DOTTED, { "data-overlay": "asymptote-0.699" });
  const legend: LegendEntry[] = [];
  curves.forEach((c, i) => {
    const color = PALETTE[i % PALETTE.length];
    plot.line(c.nb.col("t"), c.nb.col("theta_sq_mean"), { stroke: color }, {
      "data-series": `nbody-${c.label}`,
    });
    plot.line(c.mf.col("t"), c.mf.col("theta_sq"), { stroke: color, width: 1.3, dash: "6 4" }, {
      "data-series": `meanfield-${c.label}`,
    });
    legend.push({ label: `N = ${c.label}`, style: { stroke: color } });
  });
  legend.push({ label: "particle ensemble", style: { stroke: "#555555" } });
  legend.push({ label: "mean field", style: { stroke: "#555555", dash: "6 4" } });
  legend.push({ label: "thermal value", style: DOTTED });
  plot.legend(legend, "tl");
  return plot.svg();
}

// -- fig 8: photon statistics across the transition -----------------------

function fig8(runDir: string, manifest: Manifest): string {
  const t = readCsv(runDir, "oracle.csv", manifest);
  const alpha = t.col("alpha");
  const nCol = t.col("N");
  const g2 = t.col("g2_quadrature");
  const ns: number[] = [];
  for (const n of nCol) if (!ns.includes(n)) ns.push(n);
  ns.sort((a, b) => a - b);
  const [aLo, aHi] = extent(alpha);
  const plot = new Plot({
    title: "Intensity correlations across the transition",
    x: { label: "pump ratio α", min: aLo, max: aHi },
    y: { label: "g²(0)", min: 0.8, max: 3.4 },
  });
  // thermodynamic-limit values: 3 below threshold, 1 above, 2.1884 at it
  plot.hline(G2_BELOW, GRAY, { "data-overlay": "const-3" }, aLo, 1.0);
  plot.hline(G2_ABOVE, GRAY, { "data-overlay": "const-1" }, 1.0, aHi);
  plot.dots([1.0], [G2_AT_THRESHOLD], "#111111", 4.5, { "data-overlay": "const-2.1884" });
  const legend: LegendEntry[] = [];
  ns.forEach((n, i) => {
    const xs: number[] = [];
    const ys: number[] = [];
    for (let k = 0; k < alpha.length; k++) {
      if (nCol[k] === n) {
        xs.push(alpha[k]);
        ys.push(g2[k]);
      }
    }
    const style = { stroke: PALETTE[i % PALETTE.length] };
    plot.line(xs, ys, style, { "data-series": `N-${n}` });
    legend.push({ label: `N = ${n}`, style });
  });
  legend.push({ label: "limit values", style: GRAY });
  legend.push({ label: "threshold point", style: { stroke: "#111111" }, marker: true });
  plot.legend(legend, "tr");
  return plot.svg();
}

const BUILDERS: Record<string, (runDir: string, manifest: Manifest) => string> = {
  "2": fig2,
  "3": fig3,
  "4": fig4,
  "5": fig5,
  "7": fig7,
  "8": fig8,
};

export const FIGURE_IDS = Object.keys(BUILDERS);

/** Render one figure from a run directory; returns the SVG document. */
export function renderFigure(fig: string | number, runDir: string): string {
  const key = String(fig);
  const builder = BUILDERS[key];
  if (builder === undefined) {
    throw new RunDirError(`unknown figure id "${key}" (expected one of ${FIGURE_IDS.join(", ")})`);
  }
  return builder(runDir, readManifest(runDir));
}
