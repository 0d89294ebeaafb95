"""``kicked-otoc`` command-line entry point.

Every run writes its data tables plus ``manifest.json``.  The manifest
echoes the resolved parameters, seed and tool version, and
``kicked-otoc replay manifest.json`` reproduces the run.

Exit codes: 0 ok, 2 invalid configuration, 3 numerical contract violation.
"""
from __future__ import annotations

import argparse
import json
import math
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from importlib import metadata
from pathlib import Path

import numpy as np

from . import jw, otoc, phase, qid, spectral
from .errors import ContractViolation, InconclusiveSpectrum
from .floquet import build_floquet
from .hilbert import SpinChainSpec
from .records import SERIES_COLUMNS, jsonable, sha256, write_csv, write_json, write_series

EXIT_OK, EXIT_CONFIG, EXIT_CONTRACT = 0, 2, 3
TOOL = "kicked-otoc"


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


# -- argument types -----------------------------------------------------------------

_PI_LITERAL = re.compile(r"^([+-]?\d*)\s*\*?\s*pi(?:\s*/\s*(\d+))?$")


@dataclass(frozen=True)
class Angle:
    literal: str
    value: float

    def __float__(self) -> float:
        return self.value


def parse_angle(text: str) -> Angle:
    """Decimal (``0.1122``) or rational multiple of π (``pi/28``, ``3pi/18``, ``-2*pi/7``)."""
    raw = str(text).strip()
    m = _PI_LITERAL.match(raw.lower().replace(" ", ""))
    if m:
        num = m.group(1)
        p = 1 if num in ("", "+") else -1 if num == "-" else int(num)
        q = int(m.group(2) or 1)
        if q == 0:
            raise argparse.ArgumentTypeError(f"zero denominator in angle {text!r}")
        frac = Fraction(p, q)
        return Angle(raw, frac.numerator * math.pi / frac.denominator)
    try:
        return Angle(raw, float(raw))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {text!r}") from None


def parse_range(text: str) -> list[float]:
    """``start:stop:step`` with both ends included."""
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    count = int(round((stop - start) / step)) + 1
    return [start + k * step for k in range(count)]


def parse_window(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None
    return lo, hi


# -- parser -------------------------------------------------------------------------------

def _chain_args(p: argparse.ArgumentParser, boundary: str = "open", n: int = 8) -> None:
    p.add_argument("--n", type=int, default=n, help="number of sites")
    p.add_argument("--boundary", choices=("open", "closed"), default=boundary)
    p.add_argument("--jx", type=float, default=1.0)
    p.add_argument("--hx", type=float, default=0.0)
    p.add_argument("--hz", type=float, default=1.0)
    p.add_argument("--tau", type=parse_angle, help="set tau0 = tau1")
    p.add_argument("--tau0", type=parse_angle)
    p.add_argument("--tau1", type=parse_angle)


def _common_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")


class _Parser(argparse.ArgumentParser):
    """Reports usage errors as the same JSON document as any other config error."""

    def error(self, message):
        _report_error(ConfigError(f"{self.prog}: {message}"), EXIT_CONFIG)
        sys.exit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=TOOL, description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("otoc-single", help="TMOTOC / LMOTOC series")
    _chain_args(p)
    p.add_argument("--axis", choices=("z", "x"), default="z")
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--kicks", type=int, default=100)
    p.add_argument("--method", choices=("auto", "eigen", "kicks"), default="auto")
    p.add_argument("--epsilon", type=float, default=otoc.DEFAULT_EPSILON)
    _common_args(p)

    p = sub.add_parser("otoc-block", help="spin-block OTOC with C2, C4 and fits")
    _chain_args(p)
    p.add_argument("--kicks", type=int, default=100)
    p.add_argument("--trace-mode", choices=("exact_trace", "haar_estimate"), default="exact_trace")
    p.add_argument("--states", type=int, default=3)
    p.add_argument("--fit", choices=("none", "growth", "saturation"), default="none")
    p.add_argument("--window", type=parse_window)
    _common_args(p)

    p = sub.add_parser("otoc-random", help="GUE-observable OTOC ensemble")
    _chain_args(p)
    p.add_argument("--kicks", type=int, default=20)
    p.add_argument("--realizations", type=int, default=100)
    p.add_argument("--fit", choices=("none", "growth", "saturation"), default="none")
    p.add_argument("--window", type=parse_window)
    _common_args(p)

    p = sub.add_parser("jw-analytic", help="closed-chain TMOTOC from free fermions")
    p.add_argument("--n", type=int, default=12)
    p.add_argument("--tau", type=parse_angle)
    p.add_argument("--tau0", type=parse_angle)
    p.add_argument("--tau1", type=parse_angle)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--kicks", type=int, default=200)
    _common_args(p)

    p = sub.add_parser("nnsd", help="quasi-energy spacing statistics")
    _chain_args(p)
    p.add_argument("--sector", choices=("even", "odd", "pooled"), default="even")
    p.add_argument("--poly-degree", type=int, default=spectral.DEFAULT_POLY_DEGREE)
    _common_args(p)

    p = sub.add_parser("phase-scan", help="time-averaged LMOTOC over the tau0-tau1 plane")
    _chain_args(p, boundary="closed")
    p.add_argument("--t", type=int, default=phase.DEFAULT_T, help="averaging horizon T")
    p.add_argument("--grid-step", type=parse_angle, default=parse_angle("pi/28"))
    p.add_argument("--grid-size", type=int, default=14)
    p.add_argument("--threshold", type=float, default=phase.DEFAULT_THRESHOLD)
    p.add_argument("--frequency", action="store_true", help="also record dominant frequencies")
    _common_args(p)

    for name, help_text in (("qid-otoc", "left/right diode OTOCs"),
                            ("qid-rect", "rectification coefficient")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--d", type=float, default=1.0, help="DMI strength")
        p.add_argument("--j1", type=float, default=1.0)
        p.add_argument("--j2", type=float, default=0.5)
        p.add_argument("--n-modes", type=int, default=1000)
        p.add_argument("--a", type=float, default=1e-3)
        p.add_argument("--a0", type=float, default=1.0)
        p.add_argument("--r12", type=float, default=10.0, help="separation in units of a")
        p.add_argument("--t-max", type=float)
        p.add_argument("--points", type=int, default=qid.DEFAULT_TIME_POINTS)
        if name == "qid-rect":
            p.add_argument("--d-sweep", type=parse_range, help="start:stop:step")
        _common_args(p)

    p = sub.add_parser("replay", help="rerun from a manifest")
    p.add_argument("manifest", type=Path)
    p.add_argument("--out", type=Path, help="override the output directory")
    return parser


# -- helpers --------------------------------------------------------------------------------

class ConfigError(ValueError):
    pass


def _durations(args) -> tuple[float, float]:
    if args.tau is not None:
        if args.tau0 is not None or args.tau1 is not None:
            raise ConfigError("give either --tau or --tau0/--tau1, not both")
        return args.tau.value, args.tau.value
    if args.tau0 is None or args.tau1 is None:
        raise ConfigError("kick durations missing: give --tau or both --tau0 and --tau1")
    return args.tau0.value, args.tau1.value


def _chain(args, boundary: str | None = None) -> SpinChainSpec:
    tau0, tau1 = _durations(args)
    return SpinChainSpec(args.n, boundary or args.boundary, args.jx, args.hx, args.hz, tau0, tau1)


def _table(args, name: str, header, rows) -> Path:
    rows = list(rows)
    if args.format == "json":
        records = [dict(zip(header, (jsonable(v) for v in row))) for row in rows]
        return write_json(args.out / f"{name}.json", records)
    return write_csv(args.out / f"{name}.csv", header, rows)


def _series_table(args, series: otoc.OtocSeries, name: str = "otoc") -> Path:
    if args.format == "json":
        from .records import series_rows
        return _table(args, name, SERIES_COLUMNS, series_rows(series))
    return write_series(args.out / f"{name}.csv", series)


def _fit(args, series: otoc.OtocSeries):
    if args.fit == "none":
        return None
    fn = otoc.fit_growth if args.fit == "growth" else otoc.fit_saturation
    return fn(series, args.window)


def _qid_params(args) -> qid.QidParams:
    return qid.QidParams(j1=args.j1, j2=args.j2, d=args.d, n_modes=args.n_modes, a=args.a,
                         a0=args.a0, r12=args.r12, t_max=args.t_max)


# -- commands ---------------------------------------------------------------------------------

def cmd_otoc_single(args):
    spec = _chain(args)
    pair = otoc.ObservablePair(f"single_site_{args.axis}", args.l, args.m)
    series = otoc.otoc_single_site(spec, pair, args.kicks, args.method)
    info = {"spec": spec, "trace_mode": series.trace_mode,
            "departure_time": otoc.departure_time(series, args.epsilon)}
    return [_series_table(args, series)], info


def cmd_otoc_block(args):
    spec = _chain(args)
    series = otoc.otoc_block(spec, args.kicks, args.trace_mode, args.states, args.seed)
    return [_series_table(args, series)], {
        "spec": spec, "trace_mode": series.trace_mode,
        "c_infinity": series.c_infinity, "fit": _fit(args, series)}


def cmd_otoc_random(args):
    spec = _chain(args)
    series = otoc.otoc_random_observables(spec, args.kicks, args.realizations, args.seed, args.jobs)
    spread = zip(series.n, series.c / series.c_infinity, series.c_err / series.c_infinity)
    files = [_series_table(args, series),
             _table(args, "spread", ("n", "scaled_mean", "scaled_stderr"), spread)]
    return files, {"spec": spec, "trace_mode": series.trace_mode,
                   "c_infinity": series.c_infinity, "fit": _fit(args, series)}


def cmd_jw(args):
    tau0, tau1 = _durations(args)
    spec = SpinChainSpec(args.n, "closed", tau0=tau0, tau1=tau1)
    n = np.arange(args.kicks + 1)
    f = jw.tmotoc_analytic(args.n, tau0, tau1, args.l, args.m, n)
    series = otoc.OtocSeries(n=n, c=1.0 - f.real, f=f,
                             protocol=otoc.ObservablePair("single_site_z", args.l, args.m),
                             spec=spec, trace_mode="jw_analytic")
    return [_series_table(args, series)], {"spec": spec, "trace_mode": "jw_analytic"}


def cmd_nnsd(args):
    spec = _chain(args)
    fmap = build_floquet(spec)
    sectors = spectral.sector_decompose(spec.n_sites, spec.boundary)
    names = ("even", "odd") if args.sector == "pooled" else (args.sector,)
    sets = [spectral.quasi_energies(fmap, s, sectors) for s in names]
    report = {"spec": spec, "sector": args.sector, "dims": sectors.dims,
              "degenerate": any(s.degenerate for s in sets), "poly_degree": args.poly_degree,
              "ks_wigner": None, "ks_poisson": None}
    spacings = np.array([])
    try:
        scored = (spectral.pooled_score(sets, args.poly_degree) if len(sets) > 1
                  else spectral.unfold_and_score(sets[0], args.poly_degree))
        spacings = scored.unfolded_spacings
        report.update(ks_wigner=scored.ks_wigner, ks_poisson=scored.ks_poisson,
                      verdict=spectral.verdict(scored))
    except InconclusiveSpectrum:
        report["verdict"] = "inconclusive"
    files = [_table(args, "spacings", ("index", "spacing"), enumerate(spacings)),
             write_json(args.out / "report.json", report)]
    return files, {"spec": spec, "verdict": report["verdict"]}


def cmd_phase_scan(args):
    template = SpinChainSpec(args.n, args.boundary, args.jx, args.hx, args.hz)
    axis = args.grid_step.value * np.arange(args.grid_size)
    grid = phase.scan(template, axis, axis, args.t, with_frequency=args.frequency, jobs=args.jobs)
    line = phase.extract_critical_line(grid, args.threshold)

    def heat_rows():
        for i, t0 in enumerate(grid.tau0_values):
            for j, t1 in enumerate(grid.tau1_values):
                freq = grid.dominant_frequency[i, j] if grid.dominant_frequency is not None else None
                log_freq = math.log10(freq) if freq is not None and freq > 0 else None
                yield t0, t1, grid.order_parameter[i, j], log_freq

    files = [_table(args, "heatmap", ("tau0", "tau1", "fbar", "dominant_frequency_log"), heat_rows()),
             _table(args, "critical_line", ("tau0", "tau1"), line.points)]
    return files, {"spec": template, "skipped_rows": line.skipped_rows, "threshold": args.threshold}


def cmd_qid_otoc(args):
    params = _qid_params(args)
    t = qid.time_grid(params, args.points)
    c_left, c_right = qid.otoc_left_right(params, t)
    files = [_table(args, "qid_otoc", ("t", "c_left", "c_right"), zip(t, c_left, c_right))]
    return files, {"params": params, "t_max": float(t[-1])}


def cmd_qid_rect(args):
    params = _qid_params(args)
    d_values = args.d_sweep if args.d_sweep is not None else [args.d]
    rows = qid.rectification_sweep(params, d_values, args.jobs, args.points)
    files = [_table(args, "rectification", ("D", "R", "zeta"), rows)]
    return files, {"params": params}


COMMANDS = {
    "otoc-single": cmd_otoc_single,
    "otoc-block": cmd_otoc_block,
    "otoc-random": cmd_otoc_random,
    "jw-analytic": cmd_jw,
    "nnsd": cmd_nnsd,
    "phase-scan": cmd_phase_scan,
    "qid-otoc": cmd_qid_otoc,
    "qid-rect": cmd_qid_rect,
}


# -- manifests ----------------------------------------------------------------------------------

_NOT_PARAMS = {"command", "out", "seed", "format", "manifest"}


def _param_value(v):
    if isinstance(v, Angle):
        return {"literal": v.literal, "value": v.value}
    if isinstance(v, tuple):
        return list(v)
    return v


def manifest_params(args) -> dict:
    return {k: _param_value(v) for k, v in sorted(vars(args).items()) if k not in _NOT_PARAMS}


def args_from_manifest(path: Path, out: Path | None) -> argparse.Namespace:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if data.get("tool") != TOOL or data.get("command") not in COMMANDS:
        raise ConfigError(f"{path} is not a {TOOL} manifest")
    values = {}
    for k, v in data["params"].items():
        if isinstance(v, dict) and "literal" in v:
            v = parse_angle(v["literal"])
        elif k == "window" and v is not None:
            v = tuple(v)
        values[k] = v
    values.update(command=data["command"], seed=data["seed"], format=data["format"],
                  out=Path(out) if out is not None else Path(data["out_dir"]))
    return argparse.Namespace(**values)


def run(args: argparse.Namespace) -> int:
    """Execute one configured command; returns the process exit code."""
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        files, info = COMMANDS[args.command](args)
    except ContractViolation as exc:
        return _report_error(exc, EXIT_CONTRACT)
    except (ValueError, ZeroDivisionError, KeyError, OSError) as exc:
        return _report_error(exc, EXIT_CONFIG)
    manifest = {
        "tool": TOOL,
        "version": tool_version(),
        "command": args.command,
        "seed": args.seed,
        "format": args.format,
        "out_dir": str(args.out),
        "params": manifest_params(args),
        "result": info,
        "outputs": {p.name: sha256(p) for p in files},
    }
    write_json(args.out / "manifest.json", manifest)
    return EXIT_OK


def _report_error(exc: BaseException, code: int) -> int:
    report = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(report, sort_keys=True), file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "replay":
        try:
            args = args_from_manifest(args.manifest, args.out)
        except (OSError, ValueError, KeyError) as exc:
            return _report_error(exc, EXIT_CONFIG)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
