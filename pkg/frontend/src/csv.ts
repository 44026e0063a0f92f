// Run-directory access for the simulation CSV bundles.
//
// Every run directory written by the selforg CLI carries a manifest.json
// listing each artifact with its sha256 and size. Readers here refuse to
// parse a CSV whose on-disk bytes do not hash to the manifest entry, so a
// figure can never be built from a half-written or hand-edited bundle.
// Values are float64 round-trips of the writer's %.17g formatting; "nan"
// and "inf" spellings map to their IEEE values.

import { createHash } from "node:crypto";
import { readFileSync } from "node:fs";
import { join } from "node:path";
import Papa from "papaparse";

export class RunDirError extends Error {}

export class ChecksumError extends RunDirError {
  constructor(name: string, expected: string, actual: string) {
    super(`${name}: sha256 mismatch (manifest ${expected.slice(0, 12)}..., file ${actual.slice(0, 12)}...)`);
  }
}

export class MissingColumnError extends RunDirError {
  constructor(file: string, column: string) {
    super(`${file}: missing column "${column}"`);
  }
}

export class EmptyCsvError extends RunDirError {
  constructor(file: string) {
    super(`${file}: no data rows`);
  }
}

export interface ManifestEntry {
  name: string;
  sha256: string;
  bytes: number;
}

export interface Manifest {
  scenario: string;
  version: string;
  files: ManifestEntry[];
}

export function readManifest(runDir: string): Manifest {
  let text: string;
  try {
    text = readFileSync(join(runDir, "manifest.json"), "utf8");
  } catch (e) {
    throw new RunDirError(`${runDir}: not a run directory (${(e as Error).message})`);
  }
  const m = JSON.parse(text) as Manifest;
  if (!Array.isArray(m.files)) {
    throw new RunDirError(`${runDir}: manifest has no file list`);
  }
  return m;
}

/** Names of manifest CSV entries matching a prefix, e.g. csvNames(m, "quench_r"). */
export function csvNames(manifest: Manifest, prefix: string): string[] {
  return manifest.files
    .map((f) => f.name)
    .filter((n) => n.startsWith(prefix) && n.endsWith(".csv"))
    .sort();
}

const toNumber = (v: unknown): number => {
  if (typeof v === "number") return v;
  const s = String(v).trim().toLowerCase();
  if (s === "nan") return NaN;
  if (s === "inf" || s === "infinity") return Infinity;
  if (s === "-inf" || s === "-infinity") return -Infinity;
  return Number(s);
};

export class Table {
  constructor(
    readonly file: string,
    readonly columns: string[],
    private readonly data: Map<string, number[]>,
  ) {}

  get rows(): number {
    return this.data.get(this.columns[0])?.length ?? 0;
  }

  col(name: string): number[] {
    const c = this.data.get(name);
    if (c === undefined) throw new MissingColumnError(this.file, name);
    return c;
  }
}

/** Read one CSV from a run directory, verifying it against the manifest. */
export function readCsv(runDir: string, name: string, manifest?: Manifest): Table {
  const m = manifest ?? readManifest(runDir);
  const entry = m.files.find((f) => f.name === name);
  if (entry === undefined) {
    throw new RunDirError(`${name}: not listed in the run manifest`);
  }
  const raw = readFileSync(join(runDir, name));
  const actual = createHash("sha256").update(raw).digest("hex");
  if (actual !== entry.sha256) {
    throw new ChecksumError(name, entry.sha256, actual);
  }
  const parsed = Papa.parse<Record<string, unknown>>(raw.toString("utf8"), {
    header: true,
    skipEmptyLines: true,
  });
  const header = (parsed.meta.fields ?? []).filter((f) => f.length > 0);
  if (header.length === 0 || parsed.data.length === 0) {
    throw new EmptyCsvError(name);
  }
  const cols = new Map<string, number[]>(header.map((h) => [h, []]));
  for (const row of parsed.data) {
    for (const h of header) {
      cols.get(h)!.push(toNumber(row[h]));
    }
  }
  return new Table(name, header, cols);
}
