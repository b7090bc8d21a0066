"""Command-line entry point: ``asv <subcommand> [options]``.

Exit codes: 0 success, 1 input/config error, 2 mission timeout,
3 analysis verdict failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import autopilot as ap
from . import swath, telemetry, wqi
from .config import Config, ConfigError, data_path, load_config
from .guidance import load_mission
from .io import write_csv
from .simulator import IntegrationError, run_mission

EXIT_OK, EXIT_INPUT, EXIT_TIMEOUT, EXIT_VERDICT = 0, 1, 2, 3

log = logging.getLogger("asvkit")


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _map(fn, items, jobs: int):
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def _load(args, check_files: bool) -> Config:
    cfg = load_config(args.config, check_files=check_files)
    if args.seed is not None:
        import dataclasses
        cfg.sim = dataclasses.replace(cfg.sim, seed=args.seed)
    return cfg


def _out_dir(args, cfg: Config | None = None) -> Path:
    if args.out is not None:
        out = Path(args.out)
    elif cfg is not None:
        out = Path(cfg.paths.out)
    else:
        out = Path("out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _fmt_root(z: complex) -> str:
    if abs(z.imag) < 1e-12:
        return f"{z.real:+.3f}"
    return f"{z.real:+.3f}{z.imag:+.3f}j"


# --- subcommands --------------------------------------------------------------

def cmd_sim(args) -> int:
    try:
        cfg = _load(args, check_files=True)
        waypoints = load_mission(cfg.paths.mission)
        field = telemetry.WaterField.from_csv(cfg.paths.field)
    except (ConfigError, ValueError, OSError) as exc:
        _err(str(exc))
        return EXIT_INPUT
    out = _out_dir(args, cfg)

    try:
        traj = run_mission(cfg.vessel, cfg.sim, cfg.autopilot, waypoints)
    except IntegrationError as exc:
        _err(str(exc))
        return EXIT_INPUT
    traj.to_csv(out / "trajectory.csv")

    # sensor stream is seeded separately from the disturbance stream
    rng = np.random.default_rng([cfg.sim.seed, 1])
    every = max(1, int(round(cfg.sample_interval / cfg.sim.dt)))
    frames = bytearray()
    for i in range(0, len(traj), every):
        t_ms = int(round(traj.t[i] * 1000.0))
        s = telemetry.sample_sensors(cfg.sensors, traj.state(i), field, t_ms, rng)
        frames += telemetry.encode_frame(s)
    (out / "telemetry.bin").write_bytes(bytes(frames))
    shore, dropped = telemetry.decode_stream(bytes(frames))
    telemetry.write_log(out / "samples.csv", shore)

    if args.plot:
        from . import plotting
        plotting.plot_trajectory(traj, waypoints, out / "trajectory.png")
        plotting.plot_heading(traj, out / "heading.png")

    status = "completed" if traj.completed else "TIMEOUT"
    print(f"mission {status}: {traj.waypoints_reached}/{len(waypoints)} waypoints, "
          f"t_end={traj.t[-1]:.2f} s, {len(shore)} samples, {dropped} frames dropped")
    print(f"wrote {out / 'trajectory.csv'}, {out / 'telemetry.bin'}, {out / 'samples.csv'}")
    return EXIT_OK if traj.completed else EXIT_TIMEOUT


def cmd_analyze_swath(args) -> int:
    src = Path(args.table1) if args.table1 else data_path("swath_table1.csv")
    expected_path = args.expected
    if expected_path is None and args.table1 is None:
        expected_path = data_path("swath_table2.csv")
    try:
        records, errors = swath.read_table1(src)
        expected = swath.read_table2(expected_path) if expected_path else None
    except (OSError, ValueError, KeyError) as exc:
        _err(str(exc))
        return EXIT_INPUT
    if not records and not errors:
        _err(f"{src}: no data rows")
        return EXIT_INPUT

    def analyze(item):
        line, rec = item
        try:
            return line, rec, swath.analyze_decay(rec, args.convention), None
        except ValueError as exc:
            return line, rec, None, swath.RowError(line, str(exc))

    results = _map(analyze, records, args.jobs)
    errors += [e for *_, e in results if e is not None]
    done = [(line, rec, an) for line, rec, an, e in results if e is None]

    header = list(swath.TABLE2_COLUMNS)
    rows = []
    for idx, (line, rec, an) in enumerate(done):
        row = list(an.row())
        if expected is not None:
            # expected rows align with input data rows (line 2 is the first)
            j = line - 2
            row.append(swath.within_tolerance(swath.compare(an, expected[j]))
                       if 0 <= j < len(expected) else "")
        rows.append(row)
        print(f"{rec.label:>12} {rec.freeboard:>4g}in  " +
              " ".join(f"{k}={v:.5g}" for k, v in zip(header, an.row())))
    if expected is not None:
        header.append("match")
    out = _out_dir(args)
    write_csv(out / "table2.csv", header, rows)
    if args.plot and done:
        from . import plotting
        plotting.plot_decay([r for _, r, _ in done], [a for *_, a in done], out / "decay.png")
    for e in sorted(errors, key=lambda e: e.line):
        _err(f"{src}: {e}")
    print(f"wrote {out / 'table2.csv'} ({len(rows)} rows, {len(errors)} rejected)")
    return EXIT_INPUT if errors else EXIT_OK


def cmd_tune_heading(args) -> int:
    try:
        cfg = _load(args, check_files=False)
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_INPUT
    out = _out_dir(args, cfg)
    plant = ap.nomoto_paper()
    ol_poles = ap.poles(plant)
    ol_ok = ap.is_stable(plant)
    print("plant: (" + " ".join(f"{c:g}" for c in plant.num) + ") / (" +
          " ".join(f"{c:g}" for c in plant.den) + ")")
    print("open-loop poles: " + ", ".join(_fmt_root(p) for p in ol_poles) +
          f" -> {'STABLE' if ol_ok else 'UNSTABLE'}")

    g = cfg.pid
    print(f"pid: kp={g.kp:g} ki={g.ki:g} kd={g.kd:g} tf={g.tf_derivative:g}")
    try:
        cl = ap.closed_loop(plant, g)
    except ValueError as exc:
        _err(str(exc))
        return EXIT_VERDICT
    cl_ok = ap.is_stable(cl)
    cl_poles = ap.poles(cl) if cl.order else np.array([])
    print("closed-loop poles: " + ", ".join(_fmt_root(p) for p in cl_poles) +
          f" -> {'STABLE' if cl_ok else 'UNSTABLE'}")

    resp = ap.step_response(cl, horizon=20.0, dt=0.01)
    write_csv(out / "step_response.csv", ("t", "y"), zip(resp.t, resp.y))
    if cl_ok:
        print(f"step: overshoot={resp.overshoot_pct:.2f}% rise={resp.rise_time:.3f} s "
              f"settling(2%)={resp.settling_time:.3f} s")
    else:
        print("step: response diverges (closed loop unstable)")

    loop = ap.open_loop(plant, g)
    gains = np.logspace(-2, 2, 161)
    locus = ap.root_locus(loop, gains)
    write_csv(out / "root_locus.csv", ("k", "re", "im"),
              ((k, z.real, z.imag) for k, roots in locus for z in roots))
    stable_k = [k for k, roots in locus if np.all(roots.real < 0)]
    if stable_k:
        print(f"loop-gain sweep: all branches in the left half plane for k in "
              f"[{min(stable_k):.4g}, {max(stable_k):.4g}] (of {gains[0]:g}..{gains[-1]:g})")
    if args.plot:
        from . import plotting
        ol_resp = ap.step_response(plant, horizon=20.0, dt=0.01)
        plotting.plot_step({"closed loop": resp, "open loop": ol_resp}, out / "step_response.png")
        plotting.plot_root_locus(locus, loop, out / "root_locus.png")
    print(f"wrote {out / 'step_response.csv'}, {out / 'root_locus.csv'}")
    return EXIT_OK if cl_ok else EXIT_VERDICT


def cmd_wqi(args) -> int:
    try:
        samples, errors = wqi.read_samples(args.samples)
    except (OSError, ValueError) as exc:
        _err(str(exc))
        return EXIT_INPUT
    for e in errors:
        _err(f"{args.samples}: {e}")
    if not samples:
        _err(f"{args.samples}: no samples")
        return EXIT_INPUT

    def judge(item):
        sid, params = item
        try:
            return sid, wqi.classify(params), None
        except ValueError as exc:
            return sid, None, str(exc)

    table = wqi.default_table()
    params = table.parameters
    rows, verdicts = [], []
    for sid, v, problem in _map(judge, samples, args.jobs):
        if problem:
            _err(f"sample {sid}: {problem}")
            continue
        verdicts.append(v)
        rows.append([sid] + [v.classes.get(p, "") for p in params] + [v.overall])
        detail = " ".join(f"{p}={c}" for p, c in v.classes.items())
        print(f"sample {sid}: {detail} -> overall {v.overall}")
    if not verdicts:
        return EXIT_INPUT

    out = _out_dir(args)
    write_csv(out / "wqi.csv", ["sample", *params, "overall"], rows)
    worst = max((v.overall for v in verdicts), key=wqi.RANK.__getitem__)
    print(f"aggregate: worst class {worst} over {len(verdicts)} samples")
    n_ec = sum("ec" in v.exceeded for v in verdicts)
    if n_ec:
        lim = table.rows["ec"].cells[wqi.CLASSES.index(table.worst_specified("ec"))]
        print(f"EC EXCEEDS the table: {n_ec} of {len(verdicts)} samples above the worst "
              f"specified class ({table.worst_specified('ec')}, {lim} uS/cm)")
    ph = [float(p["ph"]) for _, p in samples if p.get("ph") is not None]
    if ph:
        chk = wqi.ph_safe_range_check(ph)
        print(f"pH range {chk.min:.3g}-{chk.max:.3g}: {'SAFE' if chk.safe else 'UNSAFE'} "
              f"(acceptable {wqi.PH_SAFE[0]}-{wqi.PH_SAFE[1]})")
    return EXIT_OK


def cmd_replay(args) -> int:
    try:
        data = Path(args.dump).read_bytes()
    except OSError as exc:
        _err(str(exc))
        return EXIT_INPUT
    samples, dropped = telemetry.decode_stream(data)
    out = _out_dir(args)
    path = telemetry.write_log(out / "replay_samples.csv", samples)
    print(f"{len(samples)} frames decoded, {dropped} frame{'s' if dropped != 1 else ''} dropped")
    print(f"wrote {path}")
    return EXIT_OK


# --- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config (default: $ASV_SIM_CONFIG, then built-ins)")
    common.add_argument("--seed", type=int, help="override sim.seed")
    common.add_argument("--out", help="output directory (default: config paths.out or ./out)")
    common.add_argument("--jobs", type=int, default=1, help="worker threads for row-wise work")
    common.add_argument("--plot", action="store_true", help="also render PNG figures into --out")

    parser = argparse.ArgumentParser(prog="asv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sim", parents=[common], help="run the waypoint mission")
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("analyze-swath", parents=[common], help="free-decay table analysis")
    p.add_argument("table1", nargs="?", help="decay-test CSV (default: shipped data)")
    p.add_argument("--expected", help="expected results CSV to compare against")
    p.add_argument("--convention", choices=("paper", "textbook"), default="paper")
    p.set_defaults(func=cmd_analyze_swath)

    p = sub.add_parser("tune-heading", parents=[common], help="Nomoto loop analysis")
    p.set_defaults(func=cmd_tune_heading)

    p = sub.add_parser("wqi", parents=[common], help="classify water samples")
    p.add_argument("samples", help="samples CSV")
    p.set_defaults(func=cmd_wqi)

    p = sub.add_parser("replay", parents=[common], help="decode a telemetry dump")
    p.add_argument("dump", help="raw concatenated frames")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.jobs < 1:
        _err("--jobs must be >= 1")
        return EXIT_INPUT
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
