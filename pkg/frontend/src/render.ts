// CLI entry: render --fig N --run DIR --out FILE
//
// Writes both an SVG and a PNG next to each other (the --out extension is
// ignored; both files share its stem). Rasterization uses the vendored
// DejaVu Sans face only, so the bytes do not depend on the host's fonts.

import { writeFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import path from "node:path";
import { Resvg } from "@resvg/resvg-js";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { FIGURE_IDS, renderFigure } from "./figures.js";
import { RunDirError } from "./csv.js";

const FONT_FILE = fileURLToPath(new URL("../assets/DejaVuSans.ttf", import.meta.url));

export function rasterize(svg: string): Buffer {
  const r = new Resvg(svg, {
    font: {
      fontFiles: [FONT_FILE],
      loadSystemFonts: false,
      defaultFontFamily: "DejaVu Sans",
    },
  });
  return r.render().asPng();
}

export function renderToFiles(fig: string | number, runDir: string, out: string): string[] {
  const stem = out.replace(/\.(svg|png)$/i, "");
  const svg = renderFigure(fig, runDir); // any failure happens before writes
  const png = rasterize(svg);
  writeFileSync(stem + ".svg", svg, "utf8");
  writeFileSync(stem + ".png", png);
  return [stem + ".svg", stem + ".png"];
}

function main(): void {
  const argv = yargs(hideBin(process.argv))
    .scriptName("render")
    .usage("$0 --fig N --run DIR --out FILE")
    .option("fig", {
      type: "string",
      demandOption: true,
      choices: FIGURE_IDS,
      describe: "figure id",
    })
    .option("run", { type: "string", demandOption: true, describe: "run directory (CSV + manifest)" })
    .option("out", { type: "string", demandOption: true, describe: "output path; .svg and .png are written" })
    .strict()
    .parseSync();
  try {
    const written = renderToFiles(argv.fig, argv.run, argv.out);
    for (const f of written) console.log(`wrote ${f}`);
  } catch (err) {
    const msg = err instanceof Error ? err.message : String(err);
    console.error(`render: ${msg}`);
    process.exitCode = err instanceof RunDirError ? 2 : 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  path.resolve(process.argv[1]) === fileURLToPath(import.meta.url);

if (invokedDirectly) main();
