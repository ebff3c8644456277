import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { beforeAll, describe, expect, it } from "vitest";

import {
  CacheError,
  ConfigError,
  GuardError,
  closeSession,
  estimate,
  mapCliError,
  openSession,
  simulate,
  type ComplexMatrix,
} from "../src/index.js";

const PYTHON = process.env.FOCKSHADOW_PYTHON ?? "python3";

function cli(args: string[]): string {
  return execFileSync(PYTHON, ["-m", "fockshadow.cli", ...args], { encoding: "utf8" });
}

let cacheDir: string;
let workDir: string;

beforeAll(() => {
  cacheDir = mkdtempSync(join(tmpdir(), "fshadow-cache-"));
  workDir = mkdtempSync(join(tmpdir(), "fshadow-work-"));
  cli(["channel", "--modes", "2", "--photons", "2", "--cache-dir", cacheDir]);
}, 120_000);

describe("sessions", () => {
  it("opens against a valid cache and reports the sector dimension", () => {
    const handle = openSession(2, 2, cacheDir);
    expect(handle.dim).toBe(3);
    expect(handle.closed).toBe(false);
  });

  it("refuses a missing cache", () => {
    expect(() => openSession(3, 2, cacheDir)).toThrow(CacheError);
  });

  it("fails cleanly on a closed handle", () => {
    const handle = openSession(2, 2, cacheDir);
    closeSession(handle);
    expect(() => estimate(handle, "irrelevant.jsonl", "identity")).toThrow(
      /closed/,
    );
  });
});

describe("simulate parity", () => {
  it("produces byte-identical shadows to the direct CLI call", () => {
    const handle = openSession(2, 2, cacheDir);
    const viaBindings = simulate(handle, {
      input: [1, 1],
      prepSeed: 5,
      numUnitaries: 40,
      shotsPerUnitary: 3,
      seed: 99,
    });
    const direct = join(workDir, "direct.jsonl");
    cli([
      "simulate",
      "--modes", "2",
      "--photons", "2",
      "--input", "1,1",
      "--prep-seed", "5",
      "--unitaries", "40",
      "--shots", "3",
      "--seed", "99",
      "--out", direct,
    ]);
    expect(readFileSync(viaBindings)).toEqual(readFileSync(direct));
  });

  it("maps bad configurations to ConfigError", () => {
    const handle = openSession(2, 2, cacheDir);
    expect(() =>
      simulate(handle, {
        input: [1, 0], // carries 1 photon, session expects 2
        numUnitaries: 2,
        shotsPerUnitary: 1,
        seed: 1,
      }),
    ).toThrow(ConfigError);
  });
});

describe("estimate parity", () => {
  let shadowPath: string;

  beforeAll(() => {
    const handle = openSession(2, 2, cacheDir);
    shadowPath = simulate(handle, {
      input: [1, 1],
      prepSeed: 7,
      numUnitaries: 60,
      shotsPerUnitary: 4,
      seed: 123,
      out: join(workDir, "estimate-source.jsonl"),
    });
  }, 120_000);

  it("identity estimates to (1, 0)", () => {
    const handle = openSession(2, 2, cacheDir);
    const result = estimate(handle, shadowPath, "identity");
    expect(Math.abs(result.estimate - 1.0)).toBeLessThanOrEqual(1e-12);
    expect(Math.abs(result.spread)).toBeLessThanOrEqual(1e-12);
  });

  it("named observables match the direct CLI numbers exactly", () => {
    const handle = openSession(2, 2, cacheDir);
    const viaBindings = estimate(handle, shadowPath, "number:1");
    const direct = JSON.parse(
      cli([
        "estimate",
        "--shadow", shadowPath,
        "--cache-dir", cacheDir,
        "--observable", "number:1",
      ]),
    );
    expect(Math.abs(viaBindings.estimate - direct.estimate)).toBeLessThanOrEqual(1e-12);
    expect(Math.abs(viaBindings.spread - direct.spread)).toBeLessThanOrEqual(1e-12);
  });

  it("matrix observables round-trip through the boundary", () => {
    const handle = openSession(2, 2, cacheDir);
    // the first-mode number operator over the (2,0),(1,1),(0,2) basis
    const data = new Float64Array(2 * 3 * 3);
    data[2 * 0] = 2.0;
    data[2 * 4] = 1.0;
    data[2 * 8] = 0.0;
    const matrix: ComplexMatrix = { d: 3, data };
    const viaMatrix = estimate(handle, shadowPath, matrix);
    const viaName = estimate(handle, shadowPath, "number:1");
    expect(viaMatrix.estimate).toBe(viaName.estimate);
    expect(viaMatrix.spread).toBe(viaName.spread);
  });

  it("rejects malformed matrix buffers", () => {
    const handle = openSession(2, 2, cacheDir);
    const matrix: ComplexMatrix = { d: 3, data: new Float64Array(4) };
    expect(() => estimate(handle, shadowPath, matrix)).toThrow(ConfigError);
  });
});

describe("error taxonomy", () => {
  it("maps the CLI exit codes onto typed errors", () => {
    expect(mapCliError(2, "bad flag")).toBeInstanceOf(ConfigError);
    expect(mapCliError(3, "too big")).toBeInstanceOf(GuardError);
    expect(mapCliError(4, "corrupt")).toBeInstanceOf(CacheError);
  });

  it("surfaces guard refusals from the CLI", () => {
    expect(() => cli(["channel", "--modes", "8", "--photons", "6", "--cache-dir", cacheDir]))
      .toThrow();
    try {
      cli(["channel", "--modes", "8", "--photons", "6", "--cache-dir", cacheDir]);
    } catch (err) {
      const status = (err as { status?: number }).status;
      expect(status).toBe(3);
    }
  });
});
