/**
 * Client for the fockshadow command-line pipelines.
 *
 * Every call shells out to the CLI and exchanges data through its public
 * surfaces: JSON on stdout, JSON-lines shadow files, and the channel-cache
 * manifest. No estimation logic lives on this side, so results are
 * numerically identical to direct CLI invocations.
 */

import { execFileSync } from "node:child_process";
import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

/** Invalid configuration rejected by the pipeline (CLI exit code 2). */
export class ConfigError extends Error {}
/** Dimension-guard refusal (CLI exit code 3). */
export class GuardError extends Error {}
/** Missing or corrupt channel cache (CLI exit code 4). */
export class CacheError extends Error {}
/** Operation on a closed session handle. */
export class SessionClosedError extends Error {}

export interface SessionHandle {
  readonly m: number;
  readonly n: number;
  readonly cacheDir: string;
  /** Sector dimension from the cache manifest. */
  readonly dim: number;
  closed: boolean;
}

/**
 * Square complex matrix as a contiguous row-major buffer of interleaved
 * [re, im] pairs (length 2 * d * d).
 */
export interface ComplexMatrix {
  d: number;
  data: Float64Array;
}

export interface EstimateResult {
  estimate: number;
  spread: number;
}

export interface SimulateConfig {
  /** Input occupation, one entry per mode; must sum to the session's n. */
  input: number[];
  /** Seed of the fixed preparation interferometer; omit for none. */
  prepSeed?: number;
  numUnitaries: number;
  shotsPerUnitary: number;
  /** "ideal" (default) or a pseudo-PNR layout. */
  detector?: "ideal" | { p: number; resolutions: number[] };
  seed: number;
  /** Output shadow path; a temp path is generated when omitted. */
  out?: string;
}

const PYTHON = process.env.FOCKSHADOW_PYTHON ?? "python3";

export function mapCliError(code: number, message: string): Error {
  if (code === 2) return new ConfigError(message);
  if (code === 3) return new GuardError(message);
  if (code === 4) return new CacheError(message);
  return new Error(`fockshadow CLI failed with code ${code}: ${message}`);
}

function runCli(args: string[]): string {
  try {
    return execFileSync(PYTHON, ["-m", "fockshadow.cli", ...args], {
      encoding: "utf8",
      stdio: ["ignore", "pipe", "pipe"],
    });
  } catch (err) {
    const failure = err as { status?: number | null; stderr?: string | Buffer };
    const detail = (failure.stderr ?? "").toString().trim();
    throw mapCliError(failure.status ?? -1, detail || String(err));
  }
}

/**
 * Open a session against an existing channel cache.
 *
 * Validates the manifest (version, sector labels) without touching the
 * projector blobs; those are verified by the CLI on every estimate call.
 */
export function openSession(m: number, n: number, cacheDir: string): SessionHandle {
  const manifestPath = join(cacheDir, `m${m}n${n}`, "manifest.json");
  if (!existsSync(manifestPath)) {
    throw new CacheError(`no cached channel for (m=${m}, n=${n}) under ${cacheDir}`);
  }
  let manifest: { version?: number; m?: number; n?: number; d?: number };
  try {
    manifest = JSON.parse(readFileSync(manifestPath, "utf8"));
  } catch (err) {
    throw new CacheError(`unreadable manifest at ${manifestPath}: ${err}`);
  }
  if (manifest.version !== 1 || manifest.m !== m || manifest.n !== n) {
    throw new CacheError(
      `manifest mismatch at ${manifestPath}: version=${manifest.version}, m=${manifest.m}, n=${manifest.n}`,
    );
  }
  return { m, n, cacheDir, dim: manifest.d ?? 0, closed: false };
}

export function closeSession(handle: SessionHandle): void {
  handle.closed = true;
}

function ensureOpen(handle: SessionHandle): void {
  if (handle.closed) {
    throw new SessionClosedError("session handle is closed");
  }
}

/** Run the data-collection loop; returns the shadow file path. */
export function simulate(handle: SessionHandle, config: SimulateConfig): string {
  ensureOpen(handle);
  const out = config.out ?? join(mkdtempSync(join(tmpdir(), "fshadow-")), "shadow.jsonl");
  const fileConfig = {
    m: handle.m,
    n: handle.n,
    input: config.input,
    prep_seed: config.prepSeed ?? null,
    num_unitaries: config.numUnitaries,
    shots_per_unitary: config.shotsPerUnitary,
    detector: config.detector ?? "ideal",
    seed: config.seed,
    out,
  };
  const configPath = join(mkdtempSync(join(tmpdir(), "fshadow-cfg-")), "run.json");
  writeFileSync(configPath, JSON.stringify(fileConfig));
  const report = JSON.parse(runCli(["simulate", "--config", configPath]));
  return report.out as string;
}

/** Row-major [re, im] nesting understood by the CLI estimate command. */
function matrixArgument(matrix: ComplexMatrix): string {
  const { d, data } = matrix;
  if (data.length !== 2 * d * d) {
    throw new ConfigError(`matrix buffer has ${data.length} floats, expected ${2 * d * d}`);
  }
  const rows: number[][][] = [];
  for (let i = 0; i < d; i++) {
    const row: number[][] = [];
    for (let j = 0; j < d; j++) {
      const base = 2 * (i * d + j);
      row.push([data[base], data[base + 1]]);
    }
    rows.push(row);
  }
  return JSON.stringify({ matrix: rows });
}

/**
 * Estimate one observable from a shadow file.
 *
 * The observable is either a name the CLI understands ("identity",
 * "number:<mode>") or an explicit sector matrix.
 */
export function estimate(
  handle: SessionHandle,
  shadowPath: string,
  observable: string | ComplexMatrix,
): EstimateResult {
  ensureOpen(handle);
  const arg = typeof observable === "string" ? observable : matrixArgument(observable);
  const report = JSON.parse(
    runCli([
      "estimate",
      "--shadow",
      shadowPath,
      "--cache-dir",
      handle.cacheDir,
      "--observable",
      arg,
    ]),
  );
  return { estimate: report.estimate as number, spread: report.spread as number };
}
