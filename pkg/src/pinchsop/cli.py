"""Command-line driver: parameter sweeps, scenario validation, MC runs, density dumps.

Every subcommand writes CSV to ``--out`` (or stdout) and line-oriented
diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

from .config import ANALYTIC_METHODS, MC_METHODS, SweepConfig, check_geometry, load_config
from .copula import estimate_rho
from .errors import ConfigError, DomainError
from .geometry import SystemGeometry, linear_to_db
from .marginals import (bob_density, dump_csv, eve_density, laws_for, pdf_x_separation,
                        pdf_z, snr_marginals)
from .montecarlo import mc_pairs, mc_sop
from .sop import SopRequest, sop_adaptive_reference, sop_chebyshev, sop_independence

HEADER = ("axis_name", "axis_value", "method", "sop", "std_error", "rho", "rho_source",
          "diagnostics")
DUMP_TARGETS = ("bob", "eve", "bob-cdf", "eve-cdf", "w", "s", "w-cdf", "s-cdf", "x", "z")


@dataclass(frozen=True)
class Row:
    axis_name: str
    axis_value: float | None
    method: str
    sop: float | None
    std_error: float | None
    rho: float | None
    rho_source: str
    diagnostics: tuple[str, ...] = ()

    def cells(self) -> list[str]:
        num = lambda v: "" if v is None else repr(float(v))  # noqa: E731
        return [self.axis_name, num(self.axis_value), self.method, num(self.sop),
                num(self.std_error), num(self.rho), self.rho_source,
                ";".join(self.diagnostics)]


@dataclass
class ValidationReport:
    ok: bool
    lines: list[str] = field(default_factory=list)
    residuals: dict[str, float] = field(default_factory=dict)
    flags: tuple[str, ...] = ()
    rho: float | None = None
    independence_limit: bool = False


@lru_cache(maxsize=64)
def _estimated_rho(D: float, h: float, delta: float, samples: int, seed: int) -> float:
    # rank-based, so the estimate does not depend on gamma_bar
    geom = SystemGeometry(D, h, delta, 1.0)
    return estimate_rho(mc_pairs(geom, samples, seed))


def _point(cfg: SweepConfig, value: float):
    """Geometry, rate threshold and (rho, source) at one sweep point."""
    sc = cfg.scenario
    changes, rth, rho = {}, sc.rate_threshold, sc.rho
    axis = cfg.sweep_axis
    if axis == "snr_db":
        changes["gamma_bar"] = 10.0 ** (value / 10.0)
    elif axis == "delta":
        changes["delta"] = value
    elif axis == "rate_threshold":
        rth = value
    elif axis == "rho":
        rho = value
    geom = sc.geometry(**changes)
    if rho is None:
        return geom, rth, _estimated_rho(geom.D, geom.h, geom.delta, cfg.rho_samples,
                                         cfg.seed), "estimated"
    return geom, rth, rho, "given"


def _evaluate(cfg: SweepConfig, index: int) -> list[Row]:
    value = cfg.axis_values[index]
    axis = cfg.sweep_axis
    try:
        geom, rth, rho, source = _point(cfg, value)
    except Exception as exc:  # whole point unusable; one error row per method
        return [Row(axis, value, m, None, None, None, "", (f"error:{type(exc).__name__}:{exc}",))
                for m in cfg.methods]

    rows = []
    for method in cfg.methods:
        try:
            if method in ANALYTIC_METHODS:
                req = SopRequest(geom, rth, rho, cfg.node_count, method)
                if method == "chebyshev":
                    res = sop_chebyshev(req)
                elif method == "adaptive-reference":
                    res = sop_adaptive_reference(req)
                else:
                    res = sop_independence(req)
                diags = res.diagnostics
                if res.node_count is not None:
                    diags = (f"nodes={res.node_count}",) + diags
                if res.error_estimate is not None and method != "chebyshev":
                    diags = diags + (f"quad_err={res.error_estimate:.3e}",)
                rows.append(Row(axis, value, method, res.probability, None, rho, source, diags))
            else:
                # common random numbers across points and modes
                est = mc_sop(geom, rth, cfg.mc_samples, cfg.seed, MC_METHODS[method],
                             fixed_position=cfg.scenario.fixed_antenna_xy)
                rows.append(Row(axis, value, method, est.sop, est.std_error, rho, source,
                                (f"samples={est.samples}", f"seed={est.seed}")))
        except Exception as exc:
            rows.append(Row(axis, value, method, None, None, rho, source,
                            (f"error:{type(exc).__name__}:{exc}",)))
    return rows


def run_sweep(cfg: SweepConfig, workers: int | None = None) -> list[Row]:
    """One row per (axis value, method), in axis order then configured method order."""
    workers = cfg.workers if workers is None else workers
    indices = range(len(cfg.axis_values))
    if workers <= 1:
        chunks = [_evaluate(cfg, i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda i: _evaluate(cfg, i), indices))
    return [row for chunk in chunks for row in chunk]


def write_rows(rows, out) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(HEADER)
    for row in rows:
        writer.writerow(row.cells())


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    write_rows(rows, buf)
    return buf.getvalue()


def validate_scenario(cfg: SweepConfig) -> ValidationReport:
    """Check the scenario and report the quantities a sweep depends on."""
    sc = cfg.scenario
    report = ValidationReport(ok=True)
    say = report.lines.append
    try:
        geom = sc.geometry()
    except DomainError as exc:
        report.ok = False
        say(f"FAIL geometry: {exc}")
        return report

    say(f"geometry D={geom.D!r} h={geom.h!r} delta={geom.delta!r} "
        f"gamma_bar={geom.gamma_bar!r} ({linear_to_db(geom.gamma_bar):.3f} dB)")
    if geom.is_aligned_limit:
        report.independence_limit = True
        say("independence-limit mode: delta = 0, Bob and Eve SNRs are independent")
    say(f"support gamma_B [{geom.gamma_b_min!r}, {geom.gamma_b_max!r}]")
    say(f"support gamma_E [{geom.gamma_e_min!r}, {geom.gamma_e_max!r}]")

    try:
        laws = laws_for(geom)
        bob, eve = bob_density(geom), eve_density(geom)
    except Exception as exc:
        report.ok = False
        say(f"FAIL marginals: {type(exc).__name__}: {exc}")
        return report
    for name, pdf in (("f_W", laws.w), ("f_S", laws.s), ("f_gamma_B", bob), ("f_gamma_E", eve)):
        report.residuals[name] = pdf.normalization_residual
        say(f"normalization {name} residual={pdf.normalization_residual:.3e}")
    report.flags = tuple(dict.fromkeys(laws.flags + bob.diagnostics + eve.diagnostics))
    for key, err in sorted(laws.mismatch.items()):
        say(f"oracle mismatch {key} {err:.3e}")
    say("fallback flags: " + (", ".join(report.flags) if report.flags else "none"))

    if sc.rho is None:
        report.rho = _estimated_rho(geom.D, geom.h, geom.delta, cfg.rho_samples, cfg.seed)
        say(f"rho estimated={report.rho!r} from {cfg.rho_samples} pairs (seed {cfg.seed})")
    else:
        report.rho = sc.rho
        say(f"rho given={report.rho!r}")
    return report


def run_mc(cfg: SweepConfig) -> list[Row]:
    """SOP at the scenario point in all three simulation modes."""
    geom = check_geometry(cfg)
    sc = cfg.scenario
    rows = []
    for method, mode in MC_METHODS.items():
        est = mc_sop(geom, sc.rate_threshold, cfg.mc_samples, cfg.seed, mode,
                     workers=cfg.workers, fixed_position=sc.fixed_antenna_xy)
        rows.append(Row("scenario", None, method, est.sop, est.std_error, None, "",
                        (f"samples={est.samples}", f"seed={est.seed}")))
    return rows


def dump_pdf(which: str, cfg: SweepConfig, out, n: int = 1001) -> None:
    """Two-column CSV of one density or CDF at the scenario point."""
    geom = check_geometry(cfg)
    D, delta = geom.D, geom.delta
    if which in ("bob", "bob-cdf", "eve", "eve-cdf"):
        marg = snr_marginals(geom)
        lo, hi = marg.bob_support if which.startswith("bob") else marg.eve_support
        func = {"bob": marg.bob_pdf, "bob-cdf": marg.bob_cdf,
                "eve": marg.eve_pdf, "eve-cdf": marg.eve_cdf}[which]
    elif which in ("w", "w-cdf", "s", "s-cdf"):
        laws = laws_for(geom)
        pdf = laws.w if which.startswith("w") else laws.s
        lo, hi = pdf.support_min, pdf.support_max
        func = {"w": laws.w, "w-cdf": laws.w_cdf, "s": laws.s, "s-cdf": laws.s_cdf}[which]
    elif which == "x":
        lo, hi, func = -D, D, lambda x: pdf_x_separation(geom, x)
    elif which == "z":
        lo, hi, func = -D - delta, D + delta, lambda z: pdf_z(geom, z)
    else:
        raise ConfigError("which", f"unknown target {which!r}; choose from {DUMP_TARGETS}")
    header = ("value", "cdf" if which.endswith("-cdf") else "density")
    dump_csv(func, lo, hi, out, n=n, header=header)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("config", help="YAML experiment file")
    p.add_argument("--seed", type=int, help="master RNG seed")
    p.add_argument("--samples", type=int, help="Monte Carlo sample count")
    p.add_argument("--nodes", type=int, help="Gauss-Chebyshev node count")
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.add_argument("--set", dest="overrides", action="append", default=[],
                   metavar="KEY=VALUE", help="override a config entry (dotted path)")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pinchsop", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in (("sweep", "run a parameter sweep"),
                       ("validate", "check a scenario before sweeping"),
                       ("mc", "Monte Carlo SOP at the scenario point")):
        _add_common(sub.add_parser(name, help=text))
    dp = sub.add_parser("dump-pdf", help="dump a density or CDF as CSV")
    dp.add_argument("which", choices=DUMP_TARGETS)
    _add_common(dp)
    return p


def _emit(text_writer, path):
    if path is None:
        text_writer(sys.stdout)
        return
    with open(path, "w", newline="") as fh:
        text_writer(fh)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.overrides, seed=args.seed,
                          mc_samples=args.samples, node_count=args.nodes)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        report = validate_scenario(cfg)
        for line in report.lines:
            print(line, file=sys.stderr)
        return 0 if report.ok else 1

    try:
        if args.command == "sweep":
            rows = run_sweep(cfg)
            for row in rows:
                if any(d.startswith("error:") for d in row.diagnostics):
                    print(f"row error {row.axis_name}={row.axis_value!r} {row.method}: "
                          f"{';'.join(row.diagnostics)}", file=sys.stderr)
            _emit(lambda fh: write_rows(rows, fh), args.out)
            print(f"sweep {cfg.sweep_axis}: {len(cfg.axis_values)} points x "
                  f"{len(cfg.methods)} methods", file=sys.stderr)
        elif args.command == "mc":
            rows = run_mc(cfg)
            _emit(lambda fh: write_rows(rows, fh), args.out)
        else:
            _emit(lambda fh: dump_pdf(args.which, cfg, fh), args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        # reader closed early (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
