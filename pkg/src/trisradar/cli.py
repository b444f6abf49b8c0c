"""Command-line entry point.

Subcommands: run | sweep | calibrate-pfa | beampattern | dump-geometry.
Exit codes: 0 success, 1 runtime failure, 2 usage or config error. All
outputs are written to a temporary name and atomically renamed, after the
whole computation has succeeded, so failures leave no partial files. The
default output directory comes from --out, else $TRISRADAR_OUT, else ".".
"""

import argparse
import csv
import io
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .beamformer import align_single_bin, beampattern_map
from .config import ConfigError, config_to_dict, load_config
from .geometry import make_tris
from .harness import calibrate_pfa, monte_carlo, sweep_elements
from .scene import PhaseConfig, random_phases

OUT_ENV_VAR = "TRISRADAR_OUT"


def _out_dir(args) -> Path:
    out = args.out or os.environ.get(OUT_ENV_VAR) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _resolve_seed(args, cfg_seed) -> int:
    if args.seed is not None:
        return args.seed
    if cfg_seed is not None:
        return cfg_seed
    generated = int(np.random.SeedSequence().entropy) % (2**63)
    print(f"seed: {generated} (generated; pass --seed to reproduce)")
    return generated


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _atomic_write(path: Path, text: str):
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    tmp.write_text(text)
    os.replace(tmp, path)


def _write_all(out_dir: Path, files: dict):
    for name, text in files.items():
        _atomic_write(out_dir / name, text)
        print(f"wrote {out_dir / name}")


def _scene_rows(cfg):
    rows = []
    for t_idx, target in enumerate(cfg.targets):
        i, j = cfg.grid.bin_coords(target.bin)
        rows.append((t_idx, target.bin, i, j,
                     float(cfg.grid.nu_x[i]), float(cfg.grid.nu_y[j]), target.snr_db))
    return rows


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    seed = _resolve_seed(args, cfg.seed)
    start = time.time()
    mc = monte_carlo(cfg, args.runs, n_jobs=args.jobs, seed=seed)
    elapsed = time.time() - start

    echo = config_to_dict(cfg)
    echo["seed"] = seed
    pulses = list(range(cfg.pulses))
    targets_out = []
    pd_rows = []
    for t_idx, target in enumerate(cfg.targets):
        targets_out.append({
            "target": t_idx, "bin": target.bin, "snr_db": target.snr_db,
            "pd": mc.pd[t_idx].tolist(),
            "ci_low": mc.ci_low[t_idx].tolist(),
            "ci_high": mc.ci_high[t_idx].tolist(),
        })
        for k in pulses:
            pd_rows.append((k, t_idx, target.snr_db, mc.pd[t_idx, k],
                            mc.ci_low[t_idx, k], mc.ci_high[t_idx, k]))

    results = {
        "config": echo,
        "runs": args.runs,
        "pd_vs_pulse": {"pulse": pulses, "targets": targets_out},
        "mean_reward": mc.mean_reward.tolist(),
    }
    if not args.no_meta:
        results["meta"] = {"wall_clock_s": elapsed, "created_unix": time.time(),
                           "version": __version__}

    qtable_rows = [(s, a, mc.sample_run.final_q[s, a])
                   for s in range(mc.sample_run.final_q.shape[0])
                   for a in range(mc.sample_run.final_q.shape[1])]
    files = {
        "results.json": _json_text(results),
        "pd_vs_pulse.csv": _csv_text(
            ("pulse", "target", "snr_db", "pd", "ci_low", "ci_high"), pd_rows),
        "scene.csv": _csv_text(
            ("target", "bin", "i", "j", "nu_x", "nu_y", "snr_db"), _scene_rows(cfg)),
        "qtable.csv": _csv_text(("s", "a", "q"), qtable_rows),
    }
    _write_all(_out_dir(args), files)
    return 0


def _parse_elements(text: str):
    items = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if "x" in token:
            nx, ny = token.split("x", 1)
            items.append((int(nx), int(ny)))
        else:
            items.append(int(token))
    if not items:
        raise ConfigError("--elements must list at least one TRIS size")
    return items


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    try:
        elements = _parse_elements(args.elements)
    except ValueError as exc:
        raise ConfigError(f"bad --elements value: {exc}") from exc
    seed = _resolve_seed(args, cfg.seed)
    start = time.time()
    sweep = sweep_elements(cfg, elements, args.runs, n_jobs=args.jobs, seed=seed)
    elapsed = time.time() - start

    echo = config_to_dict(cfg)
    echo["seed"] = seed
    rows = []
    entries_out = []
    for entry in sweep.entries:
        per_target = []
        for t_idx, target in enumerate(cfg.targets):
            rows.append((entry.n_elements, t_idx, target.snr_db,
                         entry.steady_pd[t_idx], entry.ci_low[t_idx], entry.ci_high[t_idx]))
            per_target.append({"target": t_idx, "bin": target.bin,
                               "snr_db": target.snr_db,
                               "pd": float(entry.steady_pd[t_idx]),
                               "ci_low": float(entry.ci_low[t_idx]),
                               "ci_high": float(entry.ci_high[t_idx])})
        entries_out.append({"n_elements": entry.n_elements,
                            "tris": {"n_x": entry.tris_spec.n_x, "n_y": entry.tris_spec.n_y},
                            "targets": per_target})
    results = {"config": echo, "runs": args.runs, "sweep": entries_out}
    if not args.no_meta:
        results["meta"] = {"wall_clock_s": elapsed, "created_unix": time.time(),
                           "version": __version__}

    files = {
        "sweep.json": _json_text(results),
        "pd_vs_elements.csv": _csv_text(
            ("n_elements", "target", "snr_db", "pd", "ci_low", "ci_high"), rows),
        "scene.csv": _csv_text(
            ("target", "bin", "i", "j", "nu_x", "nu_y", "snr_db"), _scene_rows(cfg)),
    }
    _write_all(_out_dir(args), files)
    return 0


def cmd_calibrate_pfa(args) -> int:
    if not (0.0 < args.pfa < 1.0):
        raise ConfigError(f"--pfa must be in (0, 1), got {args.pfa}")
    if args.trials < 1:
        raise ConfigError("--trials must be positive")
    if args.nr < 1:
        raise ConfigError("--nr must be positive")
    seed = args.seed if args.seed is not None else 0
    report = calibrate_pfa(args.pfa, args.trials, args.nr, seed)
    row = (report["p_fa_target"], report["eta"], report["trials"],
           report["fa_observed"], report["fa_rate"], report["ci_low"], report["ci_high"])
    files = {"pfa_calibration.csv": _csv_text(
        ("p_fa_target", "eta", "trials", "fa_observed", "fa_rate", "ci_low", "ci_high"),
        [row])}
    _write_all(_out_dir(args), files)
    print(f"target {report['p_fa_target']:g} observed {report['fa_rate']:.6f} "
          f"[{report['ci_low']:.6f}, {report['ci_high']:.6f}]")
    return 0


def _parse_phases(spec_text: str, cfg, tris, rng) -> PhaseConfig:
    n = tris.n_elements
    if spec_text == "random":
        return random_phases(n, rng)
    if spec_text.startswith("aligned:"):
        where = spec_text[len("aligned:"):]
        if where == "broadside":
            nu = (0.0, 0.0)
        else:
            if where.startswith("bin(") and where.endswith(")"):
                where = where[4:-1]
            try:
                i, j = (int(part) for part in where.split(","))
            except ValueError as exc:
                raise ConfigError(f"bad aligned bin spec '{spec_text}'; "
                                  f"use aligned:broadside or aligned:bin(i,j)") from exc
            try:
                nu = (float(cfg.grid.nu_x[i]), float(cfg.grid.nu_y[j]))
            except IndexError as exc:
                raise ConfigError(f"aligned bin ({i}, {j}) outside the grid") from exc
        return align_single_bin(tris.w, nu[0], nu[1], tris.spec)
    path = Path(spec_text)
    if not path.exists():
        raise ConfigError(f"phase spec '{spec_text}' is neither a keyword nor a file")
    try:
        values = json.loads(path.read_text())
        phases = np.asarray(values, dtype=float)
    except (json.JSONDecodeError, ValueError) as exc:
        raise ConfigError(f"phase file {path} must be a JSON array of radians") from exc
    if phases.shape != (n,):
        raise ConfigError(f"phase file {path} has {phases.size} values, expected {n}")
    return PhaseConfig(phases)


def cmd_beampattern(args) -> int:
    cfg = load_config(args.config)
    tris = make_tris(cfg.tris_spec, cfg.frequency_hz, cfg.d_l_wavelengths)
    seed = _resolve_seed(args, cfg.seed)
    rng = np.random.default_rng(seed)
    phase = _parse_phases(args.phases, cfg, tris, rng)
    gains = beampattern_map(phase.phasors * tris.w, cfg.grid, tris.spec)
    rows = []
    for m in range(cfg.grid.n_bins):
        i, j = cfg.grid.bin_coords(m)
        b = float(gains[m])
        rows.append((i, j, float(cfg.grid.nu_x[i]), float(cfg.grid.nu_y[j]),
                     b, 10.0 * np.log10(max(b, 1e-300))))
    files = {"beampattern.csv": _csv_text(("i", "j", "nu_x", "nu_y", "B", "B_dB"), rows)}
    _write_all(_out_dir(args), files)
    return 0


def cmd_dump_geometry(args) -> int:
    cfg = load_config(args.config)
    tris = make_tris(cfg.tris_spec, cfg.frequency_hz, cfg.d_l_wavelengths)
    rows = [(n, tris.positions[n, 0], tris.positions[n, 1],
             tris.w[n].real, tris.w[n].imag)
            for n in range(tris.n_elements)]
    files = {"geometry.csv": _csv_text(("element", "x", "y", "re_w", "im_w"), rows)}
    _write_all(_out_dir(args), files)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trisradar",
        description="Cognitive radar simulator: SARSA-driven TRIS beamforming "
                    "with CFAR multi-target detection.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, runs_default=None):
        p.add_argument("--config", required=True, help="path to JSON config")
        p.add_argument("--seed", type=int, default=None,
                       help="master seed (overrides config; generated if absent)")
        p.add_argument("--out", default=None,
                       help=f"output directory (default ${OUT_ENV_VAR} or .)")
        if runs_default is not None:
            p.add_argument("--runs", type=int, default=runs_default,
                           help="independent Monte-Carlo runs")
            p.add_argument("--jobs", type=int, default=None,
                           help="worker processes (default: CPU count)")
            p.add_argument("--no-meta", action="store_true",
                           help="omit wall-clock metadata from the results JSON")

    p_run = sub.add_parser("run", help="Monte-Carlo detection-vs-pulse experiment")
    common(p_run, runs_default=50)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="steady-state detection vs TRIS size")
    common(p_sweep, runs_default=50)
    p_sweep.add_argument("--elements", required=True,
                         help="comma list of sizes: perfect squares or NXxNY, "
                              "e.g. 16,64,144 or 8x8,12x12")
    p_sweep.set_defaults(func=cmd_sweep)

    p_cal = sub.add_parser("calibrate-pfa", help="empirical false-alarm-rate check")
    p_cal.add_argument("--pfa", type=float, required=True)
    p_cal.add_argument("--trials", type=int, default=100_000)
    p_cal.add_argument("--nr", type=int, default=16, help="receive elements")
    p_cal.add_argument("--seed", type=int, default=None)
    p_cal.add_argument("--out", default=None)
    p_cal.set_defaults(func=cmd_calibrate_pfa)

    p_beam = sub.add_parser("beampattern", help="beampattern heatmap CSV for a phase config")
    common(p_beam)
    p_beam.add_argument("--phases", default="aligned:broadside",
                        help="random | aligned:broadside | aligned:bin(i,j) | "
                             "path to a JSON array of N radians")
    p_beam.set_defaults(func=cmd_beampattern)

    p_geom = sub.add_parser("dump-geometry", help="TRIS element positions and w vector")
    common(p_geom)
    p_geom.set_defaults(func=cmd_dump_geometry)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
