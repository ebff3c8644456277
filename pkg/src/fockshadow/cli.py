"""Command-line pipelines: channel caching, simulation, estimation, demos.

Every command is a pure function of its flags, config file and seeds;
re-running writes byte-identical outputs. Timing goes to stderr only.
Exit codes: 0 success, 2 config error, 3 guard violation, 4 cache problem.
"""

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from .cache import load_channel, load_or_build_channel, resolve_cache_dir
from .channel import build_measurement_channel
from .detector import (
    DetectorConfig,
    mitigate_histogram,
    sample_pnr_outcomes,
    sample_pseudo_pnr_outcomes,
    total_variation_distance,
)
from .errors import CacheError, ConfigError, FockShadowError, GuardError
from .fock import enumerate_sector_basis, sample_haar_unitary
from .observables import (
    all_bipartitions,
    binned_distribution,
    correlator_matrix,
    invariant_I,
    invariant_gamma_spectrum,
    invariant_rhoT_spectrum,
    lie_hamiltonian_basis,
)
from .rng import STREAM_SHOTS, substream
from .shadows import estimate_observable, collect_shadow, read_shadow, write_shadow
from .states import evolve, output_distribution, prepare_basis_state

EXIT_CONFIG = 2
EXIT_GUARD = 3
EXIT_CACHE = 4


def _emit(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")


def _log(msg: str) -> None:
    sys.stderr.write(msg + "\n")


def _parse_occupation(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.replace(" ", "").split(","))
    except ValueError as exc:
        raise ConfigError(f"bad occupation {text!r}: {exc}") from exc


def _load_json_arg(text: str) -> dict:
    """Accept either inline JSON or a path to a JSON file."""
    text = text.strip()
    if text.startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad inline JSON: {exc}") from exc
    path = Path(text)
    if not path.is_file():
        raise ConfigError(f"no such file: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc


def _detector_from_arg(arg) -> DetectorConfig | None:
    if arg is None or arg == "ideal":
        return None
    if isinstance(arg, dict):
        return DetectorConfig.from_dict(arg)
    return DetectorConfig.from_dict(_load_json_arg(arg))


def _true_state_from_arg(arg: str, m: int):
    data = _load_json_arg(arg)
    if "input" not in data:
        raise ConfigError('true state spec needs an "input" occupation list')
    occupation = tuple(int(x) for x in data["input"])
    if len(occupation) != m:
        raise ConfigError(f"true-state occupation covers {len(occupation)} modes, shadow has {m}")
    state = prepare_basis_state(m, occupation)
    prep_seed = data.get("prep_seed")
    if prep_seed is not None:
        state = evolve(state, sample_haar_unitary(m, int(prep_seed)))
    return state


def _merge_config(args, defaults: dict, optional: tuple = ("prep_seed",)) -> dict:
    cfg = dict(defaults)
    if getattr(args, "config", None):
        file_cfg = _load_json_arg(args.config)
        unknown = set(file_cfg) - set(defaults)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(file_cfg)
    flag_map = {
        "m": "modes",
        "n": "photons",
        "input": "input",
        "prep_seed": "prep_seed",
        "num_unitaries": "unitaries",
        "shots_per_unitary": "shots",
        "detector": "detector",
        "seed": "seed",
        "out": "out",
    }
    for key, flag in flag_map.items():
        if key in cfg and getattr(args, flag, None) is not None:
            cfg[key] = getattr(args, flag)
    missing = [k for k, v in cfg.items() if v is None and k not in optional]
    if missing:
        raise ConfigError(f"missing required config values: {missing}")
    return cfg


# ---------------------------------------------------------------------------
# channel


def cmd_channel(args) -> int:
    cache_dir = resolve_cache_dir(args.cache_dir)
    t0 = time.perf_counter()
    try:
        channel = load_channel(cache_dir, args.modes, args.photons)
        status = "validated"
    except CacheError:
        channel = None
        status = "built"
    if channel is None:
        from .cache import save_channel

        channel = build_measurement_channel(args.modes, args.photons)
        save_channel(cache_dir, channel)
    elapsed = time.perf_counter() - t0
    _log(f"channel (m={args.modes}, n={args.photons}) {status} in {elapsed:.3f} s")
    _emit(
        {
            "command": "channel",
            "status": status,
            "m": channel.m,
            "n": channel.n,
            "d": channel.sector_dim,
            "eigenvalues": [float(s) for s in channel.eigenvalues],
            "dims": [p.dim for p in channel.projectors],
            "nnz": [p.matrix.nnz for p in channel.projectors],
        }
    )
    return 0


# ---------------------------------------------------------------------------
# simulate


_SIMULATE_DEFAULTS = {
    "m": None,
    "n": None,
    "input": None,
    "prep_seed": None,
    "num_unitaries": None,
    "shots_per_unitary": None,
    "detector": "ideal",
    "seed": None,
    "out": None,
}


def _prepare_source(cfg) -> tuple:
    occupation = cfg["input"]
    if isinstance(occupation, str):
        occupation = _parse_occupation(occupation)
    occupation = tuple(int(x) for x in occupation)
    m = int(cfg["m"])
    n = int(cfg["n"])
    if len(occupation) != m:
        raise ConfigError(f"input occupation covers {len(occupation)} modes, expected {m}")
    if sum(occupation) != n:
        raise ConfigError(f"input occupation carries {sum(occupation)} photons, expected {n}")
    state = prepare_basis_state(m, occupation)
    prep_seed = cfg["prep_seed"]
    if prep_seed is not None and str(prep_seed) != "identity":
        state = evolve(state, sample_haar_unitary(m, int(prep_seed)))
    return state, m, n


def cmd_simulate(args) -> int:
    cfg = _merge_config(args, _SIMULATE_DEFAULTS)
    state, m, n = _prepare_source(cfg)
    detector = _detector_from_arg(cfg["detector"])
    if detector is not None and detector.m != m:
        raise ConfigError(f"detector covers {detector.m} logical modes, expected {m}")
    t0 = time.perf_counter()
    shadow = collect_shadow(
        state,
        num_unitaries=int(cfg["num_unitaries"]),
        shots_per_unitary=int(cfg["shots_per_unitary"]),
        seed=int(cfg["seed"]),
        detector=detector,
        n=n,
    )
    out_path = Path(cfg["out"])
    out_path.parent.mkdir(parents=True, exist_ok=True)
    write_shadow(shadow, out_path)
    _log(f"simulated {len(shadow)} records in {time.perf_counter() - t0:.3f} s -> {out_path}")
    empty = sum(1 for rec in shadow.records if not rec.outcomes)
    if empty:
        _log(f"warning: {empty} records have zero resolved shots")
    _emit(
        {
            "command": "simulate",
            "out": str(out_path),
            "records": len(shadow),
            "shots": shadow.shot_count,
            "empty_records": empty,
        }
    )
    return 0


# ---------------------------------------------------------------------------
# estimate


def _named_observable(name: str, d: int, basis) -> np.ndarray:
    if name == "identity":
        return np.eye(d)
    if name.startswith("number:"):
        idx = int(name.split(":", 1)[1])
        occ = basis.occupancy_matrix()
        if not 1 <= idx <= basis.m:
            raise ConfigError(f"mode index {idx} out of range 1..{basis.m}")
        return np.diag(occ[:, idx - 1].astype(float))
    raise ConfigError(f"unknown observable name {name!r}")


def _observable_from_arg(arg: str, basis) -> np.ndarray:
    d = basis.size
    if arg.startswith("{") or Path(arg).suffix == ".json" and Path(arg).is_file():
        data = _load_json_arg(arg)
        if "matrix" not in data:
            raise ConfigError('observable JSON needs a "matrix" of [re, im] pairs')
        rows = data["matrix"]
        mat = np.array([[complex(re, im) for re, im in row] for row in rows])
        if mat.shape != (d, d):
            raise ConfigError(f"observable has shape {mat.shape}, sector needs ({d}, {d})")
        return mat
    return _named_observable(arg, d, basis)


def _estimate_workloads(shadow, channel, sets, true_state, out_dir: Path):
    basis = channel.basis
    m, n = shadow.m, shadow.n
    out_dir.mkdir(parents=True, exist_ok=True)
    summary: dict = {"records": len(shadow), "shots": shadow.shot_count}
    if "correlators" in sets:
        est = correlator_matrix(shadow, channel).matrix
        exact = None if true_state is None else correlator_matrix(true_state, n=n).matrix
        with open(out_dir / "correlators.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["i", "j", "estimate", "exact", "abs_error"])
            for i in range(m):
                for j in range(m):
                    row = [i + 1, j + 1, repr(float(est[i, j]))]
                    if exact is None:
                        row += ["", ""]
                    else:
                        row += [repr(float(exact[i, j])), repr(float(abs(est[i, j] - exact[i, j])))]
                    writer.writerow(row)
        if exact is not None:
            summary["correlator_mean_abs_error"] = float(np.mean(np.abs(est - exact)))
    if "invariants" in sets:
        lie = lie_hamiltonian_basis(m, basis)
        report = {
            "invariant_I": invariant_I(shadow, lie, channel),
            "rhoT_spectrum": [float(x) for x in invariant_rhoT_spectrum(shadow, lie, channel)],
            "gamma_spectrum": [float(x) for x in invariant_gamma_spectrum(shadow, lie, channel)],
        }
        if true_state is not None:
            report["exact"] = {
                "invariant_I": invariant_I(true_state, lie),
                "rhoT_spectrum": [float(x) for x in invariant_rhoT_spectrum(true_state, lie)],
                "gamma_spectrum": [float(x) for x in invariant_gamma_spectrum(true_state, lie)],
            }
            summary["invariant_I"] = report["invariant_I"]
            summary["invariant_I_relative_error"] = float(
                abs(report["invariant_I"] - report["exact"]["invariant_I"])
                / abs(report["exact"]["invariant_I"])
            )
        (out_dir / "invariants.json").write_text(json.dumps(report, sort_keys=True, indent=1) + "\n")
    if "binned" in sets:
        tables = []
        tvds = []
        for part in all_bipartitions(m):
            table = binned_distribution(shadow, part, channel)
            entry = {
                "bins": [
                    sorted(mode + 1 for mode, lab in enumerate(part.assignment) if lab == label)
                    for label in range(part.K)
                ],
                "outcomes": [list(occ) for occ in table.outcomes],
                "probabilities": [float(p) for p in table.probabilities],
            }
            if true_state is not None:
                exact_table = binned_distribution(true_state, part, n=n)
                entry["exact_probabilities"] = [float(p) for p in exact_table.probabilities]
                tvd = total_variation_distance(table.probabilities, exact_table.probabilities)
                entry["tvd_to_exact"] = float(tvd)
                tvds.append(tvd)
            tables.append(entry)
        (out_dir / "binned.json").write_text(json.dumps({"bipartitions": tables}, sort_keys=True, indent=1) + "\n")
        if tvds:
            summary["mean_binned_tvd"] = float(np.mean(tvds))
    return summary


def cmd_estimate(args) -> int:
    cache_dir = resolve_cache_dir(args.cache_dir)
    shadow = read_shadow(args.shadow)
    channel = load_channel(cache_dir, shadow.m, shadow.n)
    if args.observable:
        mat = _observable_from_arg(args.observable, channel.basis)
        result = estimate_observable(shadow, mat, channel)
        _emit(
            {
                "command": "estimate",
                "observable": args.observable if not args.observable.startswith("{") else "matrix",
                "estimate": result.estimate,
                "spread": result.spread,
            }
        )
        return 0
    sets = set(args.observables.split(",")) if args.observables else {"correlators", "invariants", "binned"}
    known = {"correlators", "invariants", "binned", "all"}
    if not sets <= known:
        raise ConfigError(f"unknown observable sets: {sorted(sets - known)}")
    if "all" in sets:
        sets = {"correlators", "invariants", "binned"}
    true_state = None if args.true_state is None else _true_state_from_arg(args.true_state, shadow.m)
    out_dir = Path(args.out or ".")
    t0 = time.perf_counter()
    summary = _estimate_workloads(shadow, channel, sets, true_state, out_dir)
    _log(f"estimated {sorted(sets)} in {time.perf_counter() - t0:.3f} s -> {out_dir}")
    summary["command"] = "estimate"
    _emit(summary)
    return 0


# ---------------------------------------------------------------------------
# mitigate-demo


def cmd_mitigate_demo(args) -> int:
    cfg = _merge_config(
        args,
        {
            "m": None,
            "n": None,
            "input": None,
            "prep_seed": "identity",
            "detector": "ideal",
            "seed": None,
            "out": None,
        },
    )
    state, m, n = _prepare_source(cfg)
    detector = _detector_from_arg(cfg["detector"])
    # the state already carries the prep evolution; measure through the identity
    exact = output_distribution(np.eye(m), state, n)
    exact = exact / exact.sum()
    grid = [int(x) for x in args.shot_grid.split(",")]
    if sorted(grid) != grid or len(set(grid)) != len(grid):
        raise ConfigError("shot grid must be strictly increasing")
    out_path = Path(cfg["out"])
    out_path.parent.mkdir(parents=True, exist_ok=True)
    seed = int(cfg["seed"])
    rows = []
    hist = None
    t0 = time.perf_counter()
    prev = 0
    for chunk_idx, shots in enumerate(grid):
        extra = shots - prev
        rng = substream(seed, STREAM_SHOTS, chunk_idx)
        if detector is None:
            piece = sample_pnr_outcomes(np.eye(m), state, extra, rng, n=n)
        else:
            piece = sample_pseudo_pnr_outcomes(np.eye(m), state, extra, detector, rng, n=n)
        hist = piece if hist is None else hist.merge(piece)
        prev = shots
        raw = hist.probabilities()
        mitigated = raw if detector is None else mitigate_histogram(hist, detector)
        rows.append(
            (
                shots,
                total_variation_distance(raw, exact),
                total_variation_distance(mitigated, exact),
            )
        )
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["shots", "tvd_raw", "tvd_mitigated"])
        for shots, raw_tvd, mit_tvd in rows:
            writer.writerow([shots, repr(float(raw_tvd)), repr(float(mit_tvd))])
    _log(f"mitigation sweep up to {grid[-1]} shots in {time.perf_counter() - t0:.3f} s")
    _emit(
        {
            "command": "mitigate-demo",
            "out": str(out_path),
            "final_tvd_raw": rows[-1][1],
            "final_tvd_mitigated": rows[-1][2],
        }
    )
    return 0


# ---------------------------------------------------------------------------
# experiment (full replication pipeline)


def cmd_experiment(args) -> int:
    cache_dir = resolve_cache_dir(args.cache_dir)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    m, n = 4, 3
    occupation = (1, 1, 1, 0)
    prep_seed = args.prep_seed if args.prep_seed is not None else 2024
    seed = args.seed if args.seed is not None else 20240
    unitaries = args.unitaries if args.unitaries is not None else 1100
    shots = args.shots if args.shots is not None else 30
    detector = (
        DetectorConfig.uniform(m, 3, 1) if args.detector is None else _detector_from_arg(args.detector)
    )
    t0 = time.perf_counter()
    channel, cached = load_or_build_channel(cache_dir, m, n)
    _log(f"channel {'loaded' if cached else 'built'} in {time.perf_counter() - t0:.2f} s")
    state = evolve(prepare_basis_state(m, occupation), sample_haar_unitary(m, prep_seed))
    t1 = time.perf_counter()
    shadow = collect_shadow(
        state, num_unitaries=unitaries, shots_per_unitary=shots, seed=seed, detector=detector, n=n
    )
    write_shadow(shadow, out_dir / "shadow.jsonl")
    _log(
        f"collected {len(shadow)} records ({shadow.shot_count} resolved shots, "
        f"avg {shadow.shot_count / len(shadow):.1f}/record) in {time.perf_counter() - t1:.2f} s"
    )
    t2 = time.perf_counter()
    summary = _estimate_workloads(
        shadow, channel, {"correlators", "invariants", "binned"}, state, out_dir
    )
    _log(f"estimated all workloads in {time.perf_counter() - t2:.2f} s")
    summary["command"] = "experiment"
    summary["prep_seed"] = prep_seed
    summary["seed"] = seed
    (out_dir / "summary.json").write_text(json.dumps(summary, sort_keys=True, indent=1) + "\n")
    _emit(summary)
    return 0


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fockshadow",
        description="Classical shadows of photonic Fock states: simulate, estimate, replicate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_channel = sub.add_parser("channel", help="build or validate a cached measurement channel")
    p_channel.add_argument("--modes", type=int, required=True)
    p_channel.add_argument("--photons", type=int, required=True)
    p_channel.add_argument("--cache-dir", default=None)
    p_channel.set_defaults(func=cmd_channel)

    p_sim = sub.add_parser("simulate", help="run the randomized data-collection loop")
    p_sim.add_argument("--config", default=None, help="JSON config mirroring the run settings")
    p_sim.add_argument("--modes", type=int, default=None)
    p_sim.add_argument("--photons", type=int, default=None)
    p_sim.add_argument("--input", default=None, help='input occupation, e.g. "1,1,1,0"')
    p_sim.add_argument("--prep-seed", dest="prep_seed", type=int, default=None)
    p_sim.add_argument("--unitaries", type=int, default=None)
    p_sim.add_argument("--shots", type=int, default=None)
    p_sim.add_argument("--detector", default=None, help='"ideal", a JSON file, or inline JSON')
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--out", default=None)
    p_sim.set_defaults(func=cmd_simulate)

    p_est = sub.add_parser("estimate", help="estimate observables from a shadow file")
    p_est.add_argument("--shadow", required=True)
    p_est.add_argument("--cache-dir", default=None)
    p_est.add_argument("--observables", default=None, help="comma list: correlators,invariants,binned,all")
    p_est.add_argument("--observable", default=None, help="single named observable or matrix JSON")
    p_est.add_argument("--true-state", dest="true_state", default=None)
    p_est.add_argument("--out", default=None)
    p_est.set_defaults(func=cmd_estimate)

    p_mit = sub.add_parser("mitigate-demo", help="TVD-versus-shots table for pseudo-PNR debiasing")
    p_mit.add_argument("--config", default=None)
    p_mit.add_argument("--modes", type=int, default=None)
    p_mit.add_argument("--photons", type=int, default=None)
    p_mit.add_argument("--input", default=None)
    p_mit.add_argument("--prep-seed", dest="prep_seed", type=int, default=None)
    p_mit.add_argument("--detector", default=None)
    p_mit.add_argument("--seed", type=int, default=None)
    p_mit.add_argument("--out", default=None)
    p_mit.add_argument(
        "--shot-grid", default="100,1000,10000,100000,1000000", help="comma list of cumulative shot counts"
    )
    p_mit.set_defaults(func=cmd_mitigate_demo)

    p_exp = sub.add_parser("experiment", help="replicate the three estimation workloads end to end")
    p_exp.add_argument("--cache-dir", default=None)
    p_exp.add_argument("--out", required=True)
    p_exp.add_argument("--prep-seed", dest="prep_seed", type=int, default=None)
    p_exp.add_argument("--seed", type=int, default=None)
    p_exp.add_argument("--unitaries", type=int, default=None)
    p_exp.add_argument("--shots", type=int, default=None)
    p_exp.add_argument("--detector", default=None)
    p_exp.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _log(f"config error: {exc}")
        return EXIT_CONFIG
    except GuardError as exc:
        _log(f"guard violation: {exc}")
        return EXIT_GUARD
    except CacheError as exc:
        _log(f"cache error: {exc}")
        return EXIT_CACHE
    except FockShadowError as exc:
        _log(f"error: {exc}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
