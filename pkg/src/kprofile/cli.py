"""``kprofile`` command-line front end.

Every command writes its tables (CSV or JSON), optional SVG figures and a
``*.manifest.json`` run record into ``--out-dir``.  Exit codes: 0 success,
2 usage or configuration error, 3 data error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import os
import platform
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .delay import DelayConfig, monitor
from .errors import InvalidConfig, KProfileError
from .ingest import (AudioWindowConfig, CsvCubeSpec, file_sha256, load_audio_windows, load_cube,
                     load_matrix)
from .ks import KsConfig, ks_simulate
from .sap import GOOD_KAPPA, KappaProfile, SapConfig, good_dimension, profile_data
from .secants import DEFAULT_MAX_SECANTS
from .subspace import geodesic_distance, pca_basis
from . import svg

THREADS_ENV = "KPROFILE_THREADS"


# ------------------------------------------------------------------ helpers

def parse_dims(text: str) -> range:
    """``"a..b"``, ``"a-b"`` or ``"m"`` to an inclusive range."""
    for sep in ("..", "-", ":"):
        if sep in text:
            lo, hi = text.split(sep, 1)
            break
    else:
        lo = hi = text
    try:
        a, b = int(lo), int(hi)
    except ValueError:
        raise InvalidConfig(f"cannot parse dimension range {text!r} (use a..b)") from None
    if a < 1 or b < a:
        raise InvalidConfig(f"dimension range {text!r} must satisfy 1 <= a <= b")
    return range(a, b + 1)


def _default_dims(dims: Optional[str], n: int) -> range:
    return parse_dims(dims) if dims else range(1, min(20, n) + 1)


def _threads(args) -> Optional[int]:
    if args.threads is not None:
        return args.threads
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise InvalidConfig(f"{THREADS_ENV}={env!r} is not an integer") from None
    return None


def _sap_config(args) -> SapConfig:
    return SapConfig(max_iters=args.max_iters, step_size=args.step_size, step_decay=args.step_decay,
                     tol=args.tol, patience=args.patience, init=args.init, seed=args.seed,
                     candidates=args.candidates, restarts=args.restarts, threads=_threads(args))


def _write_csv(path: Path, rows: list[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if not rows:
            return
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


class Run:
    """Collects what a command read and wrote, then emits the manifest."""

    def __init__(self, args, argv: Sequence[str]):
        self.args = args
        self.argv = list(argv)
        self.out_dir = Path(args.out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.inputs: dict = {}
        self.outputs: list[Path] = []
        self.config: dict = {}
        self.started = _now()

    def input(self, path) -> Path:
        path = Path(path)
        self.inputs[str(path)] = file_sha256(path)
        return path

    def output(self, name: str) -> Path:
        path = self.out_dir / name
        self.outputs.append(path)
        return path

    def finish(self, stem: str) -> Path:
        manifest = {
            "tool": "kprofile",
            "version": __version__,
            "command": self.args.command,
            "argv": self.argv,
            "cwd": str(Path.cwd()),
            "python": platform.python_version(),
            "numpy": np.__version__,
            "seed": self.args.seed,
            "threads": _threads(self.args),
            "config": self.config,
            "inputs": self.inputs,
            "outputs": {str(p): file_sha256(p) for p in self.outputs},
            "started": self.started,
            "finished": _now(),
        }
        path = self.out_dir / f"{stem}.manifest.json"
        _write_json(path, manifest)
        return path


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _emit_profile(run: Run, stem: str, profile: KappaProfile, threshold: float, fmt: str,
                  plot: bool, extra: Optional[dict] = None) -> None:
    rows = profile.rows()
    gd = good_dimension(profile, threshold)
    if fmt == "json":
        _write_json(run.output(f"{stem}.json"),
                    {"label": profile.label, "kappa_threshold": threshold, "good_dimension": gd,
                     "entries": rows, **(extra or {})})
    else:
        _write_csv(run.output(f"{stem}.csv"), rows)
    if plot:
        text = svg.line_plot([(profile.label or "kappa", profile.dims, profile.kappas)],
                             title=f"kappa-profile {profile.label}".strip(), xlabel="m",
                             ylabel="kappa", hline=threshold, ylim=(0.0, 1.0))
        run.output(f"{stem}.svg").write_text(text, encoding="utf-8")
    print(f"good dimension (kappa >= {threshold:g}): {gd if gd is not None else 'none'}")


# ----------------------------------------------------------------- commands

def cmd_ks_gen(args, run: Run) -> None:
    cfg = KsConfig(alpha=args.alpha, grid_points=args.grid, dt=args.dt,
                   transient_steps=args.transient_steps, sample_stride=args.sample_stride,
                   n_samples=args.samples, init=args.ks_init,
                   seed=args.seed if (args.ks_init == "seeded_random" or args.noise) else None,
                   noise=args.noise, dealias=not args.no_dealias, drop_mean=not args.keep_mean)
    run.config = cfg.to_dict()
    traj = ks_simulate(cfg)
    name = args.output or f"ks_alpha{args.alpha:g}.csv"
    csv_path = run.output(name)
    sidecar = traj.save(csv_path)
    run.outputs.append(sidecar)
    print(f"wrote {traj.states.shape[0]} x {traj.states.shape[1]} states to {csv_path}")
    run.finish(Path(name).stem)


def _profile_common(args, run: Run, data, stem: str, extra_config: Optional[dict] = None) -> None:
    dims = _default_dims(args.dims, data.n)
    sap_cfg = _sap_config(args)
    run.config = {"dims": [dims.start, dims.stop - 1], "sap": sap_cfg.to_dict(),
                  "max_secants": args.max_secants, "kappa_threshold": args.kappa_threshold,
                  **(extra_config or {})}
    profile = profile_data(data, dims, sap_cfg, max_secants=args.max_secants, seed=args.seed)
    _emit_profile(run, stem, profile, args.kappa_threshold, args.format, args.plot)
    run.finish(stem)


def cmd_profile(args, run: Run) -> None:
    data = load_matrix(run.input(args.input), delimiter=args.delimiter)
    _profile_common(args, run, data, f"{Path(args.input).stem}.profile")


def cmd_audio_profile(args, run: Run) -> None:
    acfg = AudioWindowConfig(decimation=args.decimation, window_len=args.window_len, hop=args.hop,
                             channels=args.channels, raw_stride=args.raw_stride)
    data = load_audio_windows(run.input(args.input), acfg)
    print(f"{data.N} windows in R^{data.n}")
    _profile_common(args, run, data, f"{Path(args.input).stem}.audio-profile",
                    {"audio": acfg.to_dict()})


def cmd_compare_pca(args, run: Run) -> None:
    data = load_matrix(run.input(args.input), delimiter=args.delimiter)
    dims = _default_dims(args.dims, min(data.n, data.N))
    sap_cfg = _sap_config(args)
    run.config = {"dims": [dims.start, dims.stop - 1], "sap": sap_cfg.to_dict(),
                  "max_secants": args.max_secants}
    profile = profile_data(data, dims, sap_cfg, max_secants=args.max_secants, seed=args.seed)
    _, spectrum = pca_basis(data, 1)
    rows = []
    for m in dims:
        pca, _ = pca_basis(data, m)
        rows.append({"m": m, "geodesic_distance": geodesic_distance(pca, profile.bases[m]),
                     "kappa": profile.kappa(m)})
    stem = f"{Path(args.input).stem}.compare-pca"
    _write_csv(run.output(f"{stem}.csv"), rows)
    _write_csv(run.output(f"{stem}.singular-values.csv"),
               [{"index": k + 1, "singular_value": float(s)} for k, s in enumerate(spectrum.values)])
    if args.plot:
        text = svg.line_plot([("geodesic", [r["m"] for r in rows], [r["geodesic_distance"] for r in rows])],
                             title="PCA vs SAP subspaces", xlabel="m", ylabel="geodesic distance")
        run.output(f"{stem}.svg").write_text(text, encoding="utf-8")
    for r in rows:
        print(f"m={r['m']:3d}  distance={r['geodesic_distance']:.4f}")
    run.finish(stem)


def cmd_monitor(args, run: Run) -> None:
    if not args.variables:
        raise InvalidConfig("--variables is required (comma-separated column names)")
    spec = CsvCubeSpec(args.input, args.time_column, args.site_column,
                       tuple(v.strip() for v in args.variables.split(",")), args.delimiter)
    run.input(args.input)
    cube = load_cube(spec)
    dcfg = DelayConfig(ell=args.delay, stride=args.stride)
    dims = _default_dims(args.dims, min(cube.v * dcfg.ell, 20))
    sap_cfg = _sap_config(args)
    run.config = {"cube": spec.to_dict(), "delay": {"ell": dcfg.ell, "stride": dcfg.stride},
                  "dims": [dims.start, dims.stop - 1], "sap": sap_cfg.to_dict(),
                  "max_secants": args.max_secants, "warm_start": not args.no_warm_start}
    series = monitor(cube, dcfg, dims, sap_cfg, secant_cap=args.max_secants, seed=args.seed,
                     warm_start=not args.no_warm_start, threads=_threads(args))
    stem = f"{Path(args.input).stem}.monitor"
    _write_csv(run.output(f"{stem}.csv"), series.rows())
    if args.plot:
        curves = [(f"m={m}", series.starts, series.kappa_series(m)) for m in dims]
        text = svg.line_plot(curves, title="kappa over time", xlabel="window start",
                             ylabel="kappa", hline=args.kappa_threshold, ylim=(0.0, 1.0),
                             markers=False)
        run.output(f"{stem}.svg").write_text(text, encoding="utf-8")
    print(f"{len(series.entries)} windows of {cube.P} points in R^{cube.v * dcfg.ell}")
    run.finish(stem)


def cmd_project(args, run: Run) -> None:
    data = load_matrix(run.input(args.input), delimiter=args.delimiter)
    if not 1 <= args.dim <= data.n:
        raise InvalidConfig(f"--dim {args.dim} outside 1..{data.n}")
    sap_cfg = _sap_config(args)
    run.config = {"dim": args.dim, "sap": sap_cfg.to_dict(), "max_secants": args.max_secants}
    profile = profile_data(data, [args.dim], sap_cfg, max_secants=args.max_secants, seed=args.seed)
    B = profile.bases[args.dim].columns
    coords = data.points @ B
    stem = f"{Path(args.input).stem}.project{args.dim}"
    np.savetxt(run.output(f"{stem}.csv"), coords, delimiter=",", fmt="%.17g")
    np.savetxt(run.output(f"{stem}.basis.csv"), B, delimiter=",", fmt="%.17g")
    if args.plot and args.dim == 3:
        run.output(f"{stem}.svg").write_text(svg.scatter3d(coords, title=f"{data.label} in R^3"),
                                             encoding="utf-8")
    print(f"kappa = {profile.kappa(args.dim):.6f}")
    run.finish(stem)


# ------------------------------------------------------------------- parser

def _add_global(p: argparse.ArgumentParser, top: bool) -> None:
    d = (lambda v: v) if top else (lambda v: argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=d(0), help="seed for every randomized step")
    p.add_argument("--threads", type=int, default=d(None),
                   help=f"worker cap (fallback: ${THREADS_ENV})")
    p.add_argument("--out-dir", default=d("."), help="directory for all outputs")
    p.add_argument("--kappa-threshold", type=float, default=d(GOOD_KAPPA),
                   help="kappa regarded as a good embedding")


def _add_sap(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("optimizer")
    d = SapConfig()
    g.add_argument("--max-iters", type=int, default=d.max_iters)
    g.add_argument("--step-size", type=float, default=d.step_size)
    g.add_argument("--step-decay", type=float, default=d.step_decay)
    g.add_argument("--tol", type=float, default=d.tol)
    g.add_argument("--patience", type=int, default=d.patience)
    g.add_argument("--init", choices=("pca", "random"), default=d.init)
    g.add_argument("--candidates", type=int, default=d.candidates,
                   help="random starting bases to score")
    g.add_argument("--restarts", type=int, default=d.restarts,
                   help="best-scoring candidates refined in addition to --init")
    g.add_argument("--max-secants", type=int, default=DEFAULT_MAX_SECANTS)


def _add_out(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--plot", action="store_true", help="also write an SVG figure")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kprofile", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_global(parser, top=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ks-gen", help="simulate Kuramoto-Sivashinsky data")
    _add_global(p, top=False)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--grid", type=int, default=32)
    p.add_argument("--dt", type=float)
    p.add_argument("--transient-steps", type=int)
    p.add_argument("--sample-stride", type=int)
    p.add_argument("--ks-init", choices=("default_cosine", "seeded_random", "zero"),
                   default="default_cosine")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--keep-mean", action="store_true", help="keep the drifting spatial mean")
    p.add_argument("--no-dealias", action="store_true")
    p.add_argument("-o", "--output", help="CSV file name inside --out-dir")
    p.set_defaults(func=cmd_ks_gen)

    for name, func, help_ in (("profile", cmd_profile, "kappa-profile of an N x n CSV"),
                              ("compare-pca", cmd_compare_pca, "PCA vs SAP subspace distances")):
        p = sub.add_parser(name, help=help_)
        _add_global(p, top=False)
        p.add_argument("input")
        p.add_argument("--dims", help="dimension range a..b (default 1..min(20, n))")
        p.add_argument("--delimiter", default=",")
        _add_sap(p)
        _add_out(p)
        p.set_defaults(func=func)

    p = sub.add_parser("monitor", help="sliding-window kappa-profiles of a delay-embedded cube")
    _add_global(p, top=False)
    p.add_argument("input")
    p.add_argument("--time-column", default="time")
    p.add_argument("--site-column", default="site")
    p.add_argument("--variables", help="comma-separated variable columns, in order")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--delay", type=int, required=True, help="delay blocks per point (ell)")
    p.add_argument("--stride", type=int, default=1, help="hop between window starts")
    p.add_argument("--dims", help="dimension range a..b")
    p.add_argument("--no-warm-start", action="store_true")
    _add_sap(p)
    _add_out(p)
    p.set_defaults(func=cmd_monitor)

    p = sub.add_parser("audio-profile", help="kappa-profile of windowed wave audio")
    _add_global(p, top=False)
    p.add_argument("input")
    d = AudioWindowConfig()
    p.add_argument("--decimation", type=int, default=d.decimation)
    p.add_argument("--window-len", type=int, default=d.window_len)
    p.add_argument("--hop", type=int)
    p.add_argument("--channels", type=int)
    p.add_argument("--raw-stride", action="store_true", help="pick samples instead of averaging")
    p.add_argument("--dims", help="dimension range a..b")
    _add_sap(p)
    _add_out(p)
    p.set_defaults(func=cmd_audio_profile)

    p = sub.add_parser("project", help="project data with the SAP basis")
    _add_global(p, top=False)
    p.add_argument("input")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--delimiter", default=",")
    _add_sap(p)
    p.add_argument("--plot", action="store_true", help="3-D scatter SVG when --dim 3")
    p.set_defaults(func=cmd_project)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        run = Run(args, argv)
        args.func(args, run)
    except KProfileError as exc:
        print(f"kprofile {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"kprofile {args.command}: {exc}", file=sys.stderr)
        return 3
    return 0


def replay(manifest_path) -> int:
    """Re-run the command recorded in a manifest from its working directory."""
    manifest = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
    cwd = os.getcwd()
    os.chdir(manifest["cwd"])
    try:
        return main(manifest["argv"])
    finally:
        os.chdir(cwd)


if __name__ == "__main__":
    sys.exit(main())
