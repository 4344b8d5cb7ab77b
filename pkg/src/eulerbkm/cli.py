"""``eulerbkm`` command line.

Commands::

    eulerbkm simulate --config PATH
    eulerbkm analyze  --input DIR|FILE... [--triplet a,b] [--output DIR]
    eulerbkm verify   --suite NAME --n N --seed S
    eulerbkm report   --series PATH [--output DIR]

Relative output directories resolve against ``$EULERBKM_OUTPUT_ROOT`` when
it is set, otherwise against the working directory.

Exit codes:

==  ==========================================================
0   success
1   I/O failure while writing outputs
2   configuration or usage error (bad config, unknown suite, N below the
    minimum, empty input, out-of-order snapshots, locked output dir)
3   numerical failure (solver divergence, failed verification check)
4   corrupt or mismatched input (snapshot checksum/magic, CSV schema)
==  ==========================================================
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import sys
import warnings
from contextlib import contextmanager
from pathlib import Path

from . import __version__
from .config import load_config
from .domains import make_slab_triplet
from .errors import (
    ConfigError,
    DivergenceFailure,
    EulerBKMError,
    InvalidIntervalError,
    SeriesError,
    SnapshotError,
    TripletError,
)
from .monitor import CRITERIA, EPS_DIR, CriteriaMonitor
from .report import read_series_csv, summary_text, write_csv, write_plots, write_summary_json
from .snapshot import file_checksum, read_snapshot, write_snapshot
from .solver import CFLWarning, ParameterError, Snapshot, run

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_NUMERIC, EXIT_CORRUPT = 0, 1, 2, 3, 4
OUTPUT_ROOT_ENV = "EULERBKM_OUTPUT_ROOT"
LOCK_NAME = ".eulerbkm.lock"
SNAPSHOT_GLOB = "*.eulb"


class CommandError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _now():
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def output_path(p) -> Path:
    p = Path(p)
    root = os.environ.get(OUTPUT_ROOT_ENV)
    if root and not p.is_absolute():
        return Path(root) / p
    return p


@contextmanager
def locked_dir(path: Path):
    """Create ``path`` and hold an exclusive lockfile in it."""
    path.mkdir(parents=True, exist_ok=True)
    lock = path / LOCK_NAME
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise CommandError(f"{path}: output directory is locked by another run ({lock})",
                           EXIT_USAGE) from None
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield path
    finally:
        lock.unlink(missing_ok=True)


def _inventory(directory: Path, paths):
    return [{"path": str(Path(p).relative_to(directory)), "bytes": Path(p).stat().st_size,
             "fnv1a64": file_checksum(p)} for p in sorted(paths)]


def _emit_outputs(series, directory: Path):
    paths = [write_csv(series, directory / "series.csv"),
             write_summary_json(series, directory / "summary.json")]
    paths += write_plots(series, directory / "plots")
    text = summary_text(series)
    (directory / "summary.txt").write_text(text)
    paths.append(directory / "summary.txt")
    return paths, text


def _write_manifest(directory: Path, manifest: dict, files):
    manifest["files"] = _inventory(directory, files)
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


# -- simulate --------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    try:
        scfg = cfg.solver_config()
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc
    grid = scfg.make_grid()
    triplet = cfg.triplet(grid.domain)
    out = output_path(args.output or cfg.output_dir)
    started = _now()
    meta = {"domain": scfg.domain, "n": list(scfg.n), "lengths": list(scfg.lengths),
            "dt": scfg.dt, "seed": scfg.seed, "initial": scfg.initial}
    try:
        monitor = CriteriaMonitor(triplet, cfg.criteria, cfg.get("monitor.eps_dir", EPS_DIR), meta)
    except TripletError as exc:
        raise ConfigError(str(exc), cfg.line_of("triplet.a")) from exc
    with locked_dir(out):
        snap_dir = out / "snapshots"
        snaps = []
        callbacks = [monitor]
        if cfg.get("output.snapshots", True):
            snap_dir.mkdir(exist_ok=True)
            for old in snap_dir.glob(SNAPSHOT_GLOB):
                old.unlink()

            def save(s):
                snaps.append(write_snapshot(snap_dir / f"snap_{s.step:07d}.eulb", s.u, s.time, s.step))
            callbacks.append(save)
        code, failure = EXIT_OK, None
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", CFLWarning)
            try:
                summ = run(scfg, callbacks)
            except DivergenceFailure as exc:
                summ, code, failure = exc.summary, EXIT_NUMERIC, str(exc)
        cfl_warnings = [str(w.message) for w in caught if issubclass(w.category, CFLWarning)]
        files, text = _emit_outputs(monitor.series, out) if len(monitor.series) else ([], "")
        manifest = {
            "toolkit": "eulerbkm", "version": __version__, "command": "simulate",
            "config_source": str(cfg.source), "config": cfg.echo(), "seed": scfg.seed,
            "started": started, "finished": _now(), "termination": summ.termination,
            "message": summ.message, "steps": summ.steps, "t_final": summ.t_final,
            "wall_clock_s": summ.wall_clock, "max_divergence": summ.max_divergence,
            "energy0": summ.energy0, "energy_final": summ.energy_final,
            "cfl_max_seen": summ.cfl_max_seen, "cfl_warnings": len(cfl_warnings),
            "series_metadata": meta,
            "monitor": {"criteria": list(monitor.series.criteria),
                        "triplet": list(triplet.transition_interval) if triplet else None,
                        "eps_dir": monitor.eps_dir},
        }
        _write_manifest(out, manifest, files + snaps)
    if text:
        print(text, end="")
    if failure:
        print(f"eulerbkm: numerical failure: {failure}; partial series kept in {out}", file=sys.stderr)
    else:
        print(f"run completed: {summ.steps} steps to t={summ.t_final:.6g}; outputs in {out}")
    return code


# -- analyze ---------------------------------------------------------------------------

def _parse_triplet(text):
    try:
        a, b = (float(p) for p in text.split(","))
    except ValueError:
        raise CommandError(f"--triplet expects 'a,b', got {text!r}", EXIT_USAGE) from None
    return a, b


def _snapshot_files(inputs):
    if len(inputs) == 1 and Path(inputs[0]).is_dir():
        d = Path(inputs[0])
        sub = d / "snapshots"
        files = sorted(d.glob(SNAPSHOT_GLOB)) or (sorted(sub.glob(SNAPSHOT_GLOB)) if sub.is_dir() else [])
        if not files:
            raise CommandError(f"{d}: no {SNAPSHOT_GLOB} snapshots found", EXIT_USAGE)
        return files, d
    files = [Path(p) for p in inputs]
    missing = [str(p) for p in files if not p.is_file()]
    if missing:
        raise CommandError(f"no such snapshot file(s): {missing}", EXIT_USAGE)
    return files, files[0].parent


def _manifest_for(base: Path):
    for cand in (base / "manifest.json", base.parent / "manifest.json"):
        if cand.is_file():
            try:
                return json.loads(cand.read_text())
            except (OSError, ValueError):
                raise CommandError(f"{cand}: unreadable manifest", EXIT_CORRUPT) from None
    return {}


def analyze_snapshots(files, triplet_ab=None, criteria=CRITERIA, eps_dir=EPS_DIR, metadata=None):
    """Recompute the criterion series from snapshot files, in the given order."""
    monitor = None
    last = None
    for f in files:
        fld, t, step = read_snapshot(f)
        if last is not None and not t > last:
            raise CommandError(f"{f}: time {t} does not follow {last} (snapshots out of order)",
                               EXIT_USAGE)
        last = t
        if monitor is None:
            triplet = None
            if triplet_ab is not None:
                try:
                    triplet = make_slab_triplet(fld.grid.domain, *triplet_ab)
                except (InvalidIntervalError, TripletError, ValueError) as exc:
                    raise CommandError(f"--triplet: {exc}", EXIT_USAGE) from None
            monitor = CriteriaMonitor(triplet, criteria, eps_dir, metadata)
        monitor.record(Snapshot(t, step, fld))
    return monitor.series


def cmd_analyze(args) -> int:
    files, base = _snapshot_files(args.input)
    manifest = _manifest_for(base)
    mon = manifest.get("monitor", {})
    triplet = _parse_triplet(args.triplet) if args.triplet else (
        tuple(mon["triplet"]) if mon.get("triplet") else None)
    criteria = tuple(mon.get("criteria", CRITERIA))
    meta = {k: v for k, v in manifest.get("series_metadata", {}).items()
            if k not in ("triplet", "termination_time")}
    series = analyze_snapshots(files, triplet, criteria, mon.get("eps_dir", EPS_DIR), meta)
    out = output_path(args.output) if args.output else base / "analysis"
    with locked_dir(out):
        paths, text = _emit_outputs(series, out)
        _write_manifest(out, {"toolkit": "eulerbkm", "version": __version__, "command": "analyze",
                              "inputs": [str(f) for f in files], "finished": _now(),
                              "monitor": {"criteria": list(criteria),
                                          "triplet": list(triplet) if triplet else None}}, paths)
    print(text, end="")
    return EXIT_OK


# -- verify ----------------------------------------------------------------------------

def cmd_verify(args) -> int:
    from .verify import run_suite

    rows = run_suite(args.suite, args.n, args.seed)
    for r in rows:
        print(r.line())
    failed = [r for r in rows if not r.passed]
    print(f"{len(rows) - len(failed)}/{len(rows)} checks passed")
    return EXIT_OK if not failed else EXIT_NUMERIC


# -- report ----------------------------------------------------------------------------

def cmd_report(args) -> int:
    path = Path(args.series)
    if not path.is_file():
        raise CommandError(f"{path}: no such series file", EXIT_USAGE)
    series = read_series_csv(path)
    out = output_path(args.output) if args.output else path.parent
    out.mkdir(parents=True, exist_ok=True)
    write_plots(series, out / "plots")
    text = summary_text(series)
    (out / "summary.txt").write_text(text)
    print(text, end="")
    return EXIT_OK


# -- entry point -----------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="eulerbkm", description="Incompressible Euler criteria toolkit.")
    p.add_argument("--version", action="version", version=f"eulerbkm {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("simulate", help="run solver and monitor from a config file")
    s.add_argument("--config", required=True)
    s.add_argument("--output", help="override output.dir")
    s.set_defaults(func=cmd_simulate)
    a = sub.add_parser("analyze", help="recompute criteria from stored snapshots")
    a.add_argument("--input", required=True, nargs="+", help="snapshot directory or files in time order")
    a.add_argument("--triplet", help="transition interval 'a,b' for the regional criteria")
    a.add_argument("--output")
    a.set_defaults(func=cmd_analyze)
    v = sub.add_parser("verify", help="run identity and inequality suites")
    v.add_argument("--suite", required=True)
    v.add_argument("--n", type=int, default=32)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)
    r = sub.add_parser("report", help="regenerate plots and summary from a series CSV")
    r.add_argument("--series", required=True)
    r.add_argument("--output")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CommandError as exc:
        msg, code = str(exc), exc.code
    except ConfigError as exc:
        msg, code = str(exc), EXIT_USAGE
    except (SnapshotError, SeriesError) as exc:
        msg, code = str(exc), EXIT_CORRUPT
    except DivergenceFailure as exc:
        msg, code = str(exc), EXIT_NUMERIC
    except EulerBKMError as exc:
        msg, code = str(exc), EXIT_USAGE
    except OSError as exc:
        msg, code = str(exc), EXIT_IO
    print(f"eulerbkm: error: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
