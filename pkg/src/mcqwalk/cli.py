"""Command-line front end: ``mcqwalk <command> [options]``.

Every command writes a plot-ready CSV (default) or JSON file to ``--out``
(``-`` for stdout). Diagnostics go to stderr; exit status is nonzero only
when an error was signaled.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import catalog, lab, spectral
from ._io import atomic_write, csv_text, fmt, json_text
from .entanglement import q_lattice_profile
from .walk import CoinState, StepConfig, WalkState, distribution_rows, evolve, new_walk_state, default_lattice_size

log = logging.getLogger("mcqwalk")


class CLIError(Exception):
    pass


def _emit(args, text: str) -> None:
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        atomic_write(args.out, text)


def _random_coin(m: int, seed: int | None) -> CoinState:
    rng = np.random.default_rng(seed)
    v = rng.normal(size=1 << m) + 1j * rng.normal(size=1 << m)
    return CoinState(v / np.linalg.norm(v))


def _load_coin(spec: str, seed: int | None) -> CoinState:
    if spec.startswith("random:"):
        params = catalog.parse_params(spec.partition(":")[2])
        return _random_coin(int(params.get("coins", 1)), seed)
    return catalog.load_coin(spec)


def _entry(args) -> catalog.CatalogEntry:
    if args.state.startswith(("random:", "file:")):
        coin = _load_coin(args.state, args.seed)
        # user states carry no entanglement label; law misses are reported as plain failures
        entry = catalog.CatalogEntry(args.state.partition(":")[0], coin, {}, "pure")
    else:
        entry = catalog.from_spec(args.state)
    _check_coins(args, entry.coin)
    return entry


def _check_coins(args, coin: CoinState) -> None:
    if args.coins is not None and args.coins != coin.num_coins:
        raise CLIError(f"coin count mismatch: --coins {args.coins} but state has {coin.num_coins} qubit(s)")


def _lattice(args, t: int) -> int:
    return args.lattice_size if args.lattice_size is not None else default_lattice_size(t)


def _walk(args, coin: CoinState) -> WalkState:
    n = _lattice(args, args.steps)
    if n < 2 * args.steps + 2:
        raise CLIError(f"lattice of {n} sites would wrap within {args.steps} steps (need >= {2 * args.steps + 2})")
    state = new_walk_state(coin, n, n // 2, for_moments=True)
    return evolve(state, StepConfig(args.active_qubit), args.steps)


def _quad(args, t: int) -> spectral.QuadratureSpec:
    base = spectral.QuadratureSpec.for_time(t)
    if args.quad_points is None:
        return base
    return spectral.QuadratureSpec(max(args.quad_points, base.num_points))


# ---------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    coin = _load_coin(args.state, args.seed)
    _check_coins(args, coin)
    state = _walk(args, coin)
    rows = distribution_rows(state)
    if args.format == "json":
        _emit(args, json_text({
            "start_site": state.start_site, "steps": state.steps_taken,
            "sites": [r[0] for r in rows], "probability": [r[1] for r in rows],
        }))
    else:
        _emit(args, csv_text(("site", "probability"), rows))
    if args.state_out:
        atomic_write(args.state_out, csv_text(
            ("coin_index", "site", "re", "im"),
            ((c, x, a.real, a.imag) for (c, x), a in np.ndenumerate(state.amplitudes)),
        ))
    return 0


def cmd_ctilde(args) -> int:
    status = 0
    rows = []
    for t in range(args.t_max + 1):
        try:
            quad = _quad(args, t)
            rows.append((t, spectral.c1_tilde(t, quad), spectral.c2_tilde(t, quad)))
        except spectral.QuadratureError as err:
            log.error("t=%d: %s", t, err)
            rows.append((t, None, None))
            status = 1
    fits = {}
    if args.fit and args.t_max >= 2:
        good = [r for r in rows if r[0] >= 1 and r[1] is not None]
        ts = [r[0] for r in good]
        lin = lab.fit_least_squares(ts, [r[1] for r in good], "linear")
        quadfit = lab.fit_least_squares(ts, [r[2] for r in good], "quadratic")
        fits = {"a0": lin.coefficients[0], "a1": lin.coefficients[1], "b0": quadfit.coefficients[0],
                "linear_residual_rms": lin.residual_rms, "quadratic_residual_rms": quadfit.residual_rms}
    if args.format == "json":
        _emit(args, json_text({"rows": [list(r) for r in rows], "fit": fits or None}))
    else:
        text = csv_text(("t", "c1_tilde", "c2_tilde"), rows)
        text += "".join(f"# {k}={fmt(v)}\n" for k, v in fits.items())
        _emit(args, text)
    return status


def _parse_grid(text: str | None, fam: catalog.Family) -> np.ndarray:
    if text is None:
        return fam.grid()
    try:
        lo, hi, n = text.split(":")
        return np.linspace(float(lo), float(hi), int(n))
    except ValueError:
        raise CLIError(f"--grid must be lo:hi:points (got {text!r})") from None


def _sweep_paths(out: str | None, qubit: int, multi: bool) -> tuple[str | None, str | None]:
    if out in (None, "-"):
        return None, None
    path = Path(out)
    stem = path.with_suffix("")
    if multi:
        stem = stem.with_name(f"{stem.name}_q{qubit}")
    suffix = path.suffix or ".csv"
    return str(stem.with_suffix(suffix)), str(stem) + ".fit.json"


def cmd_sweep(args) -> int:
    fam = catalog.family(args.family)
    grid = _parse_grid(args.grid, fam)
    fixed = catalog.parse_params(args.fixed or "")
    qubits = args.active_qubit or list(range(1, fam.num_coins + 1))
    for q in qubits:
        report = lab.run_sweep(fam, grid, q, args.steps, fixed, args.lattice_size)
        try:
            report.fit = lab.fit_a0(report)
        except lab.DegenerateSweepError as err:
            log.warning("%s; no A0 fit", err)
        else:
            kind = fam.at(grid[0], **fixed).entanglement_class
            if kind != "pure":
                log.warning("%s mixes entanglement kinds; the A0 fit is not meaningful", fam.name)
            log.info("qubit %d: A0 = %.6f (c1_tilde^2 = %.6f)", q, report.fit.coefficients[0], report.c1_tilde_sq)
        data_path, fit_path = _sweep_paths(args.out, q, len(qubits) > 1)
        if args.format == "json":
            text = json_text({"report": report.to_dict(), "fit": report.fit_summary()})
        else:
            text = report.csv_text()
        if data_path is None:
            sys.stdout.write(text)
        else:
            atomic_write(data_path, text)
            atomic_write(fit_path, json_text(report.fit_summary()))
    return 0


def _law(args, check) -> int:
    entry = _entry(args)
    report = check(entry, args.active_qubit, args.steps, args.lattice_size)
    if args.format == "csv":
        d = report.to_dict()
        d.pop("params")
        _emit(args, csv_text(tuple(d), [tuple(d.values())]))
    else:
        _emit(args, json_text(report.to_dict()))
    if report.status == "mixed-exception":
        log.info("state mixes entanglement kinds: the law is not expected to hold")
    return 0


def cmd_meancheck(args) -> int:
    return _law(args, lab.mean_law_check)


def cmd_varcheck(args) -> int:
    return _law(args, lab.variance_law_check)


def cmd_qprofile(args) -> int:
    entry = _entry(args)
    if entry.num_coins < 2:
        raise CLIError("global entanglement needs at least two coin qubits")
    n = _lattice(args, args.steps)
    if args.mode == "lattice":
        state = _walk(args, entry.coin)
        profile = q_lattice_profile(state)
        if args.format == "json":
            _emit(args, json_text([{"site": p.site, "weight": p.weight, "Q": p.q} for p in profile]))
        else:
            _emit(args, csv_text(("site", "weight", "Q"), ((p.site, p.weight, p.q) for p in profile)))
        return 0
    sites = args.sites if args.sites else [n // 2]
    rows = lab.q_time_series(entry, args.active_qubit, sites, args.steps, n)
    header = ("t", *(f"Q_{x}" for x in sites))
    if args.format == "json":
        _emit(args, json_text({"sites": sites, "rows": [[t, *(s.q for s in qs)] for t, qs in rows]}))
    else:
        _emit(args, csv_text(header, ([t, *(s.q for s in qs)] for t, qs in rows)))
    return 0


def cmd_symmetry(args) -> int:
    entry = _entry(args)
    p_asym, q_asym = lab.distribution_symmetry(entry, args.active_qubit, args.steps, args.lattice_size)
    if args.format == "json":
        _emit(args, json_text({"p_asymmetry": p_asym, "q_asymmetry": q_asym}))
    else:
        _emit(args, csv_text(("p_asymmetry", "q_asymmetry"), [(p_asym, q_asym)]))
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="-", help="output file ('-' for stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--quad-points", type=int, help="minimum quadrature nodes")
    common.add_argument("--lattice-size", type=int, help="default 2*steps + 21")
    common.add_argument("--seed", type=int, help="seed for random:coins=M states")
    common.add_argument("-v", "--verbose", action="store_true")

    def state_opts(p, steps_default=50):
        p.add_argument("--state", required=True,
                       help="catalog spec name:key=value,..., file:<path>, or random:coins=M")
        p.add_argument("--coins", type=int, help="expected number of coin qubits")
        p.add_argument("--active-qubit", type=int, default=1)
        p.add_argument("--steps", type=int, default=steps_default)

    parser = argparse.ArgumentParser(prog="mcqwalk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="position distribution after t steps")
    state_opts(p)
    p.add_argument("--state-out", help="also write the full amplitude snapshot CSV here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ctilde", parents=[common], help="c1_tilde, c2_tilde table")
    p.add_argument("--t-max", type=int, default=100)
    p.add_argument("--fit", action="store_true", help="append a0, a1, b0 fit lines")
    p.set_defaults(func=cmd_ctilde)

    p = sub.add_parser("sweep", parents=[common], help="parameter sweep and A0 fit")
    p.add_argument("--family", required=True, choices=list(catalog.FAMILIES))
    p.add_argument("--grid", help="lo:hi:points (default: family range)")
    p.add_argument("--fixed", help="fixed parameters key=value,...")
    p.add_argument("--active-qubit", type=int, action="append", help="repeatable; default all")
    p.add_argument("--steps", type=int, default=50)
    p.set_defaults(func=cmd_sweep)

    for name, func, text in (("meancheck", cmd_meancheck, "check <x>^2 = c1^2 (1 - IC^2)"),
                             ("varcheck", cmd_varcheck, "check the variance law")):
        p = sub.add_parser(name, parents=[common], help=text)
        state_opts(p)
        p.set_defaults(func=func)

    p = sub.add_parser("qprofile", parents=[common], help="global entanglement Q per site")
    state_opts(p)
    p.add_argument("--mode", choices=("lattice", "timeseries"), default="lattice")
    p.add_argument("--sites", type=int, nargs="+", help="lattice indices (timeseries mode)")
    p.set_defaults(func=cmd_qprofile)

    p = sub.add_parser("symmetry", parents=[common], help="mirror asymmetry of P(x) and Q(x)")
    state_opts(p)
    p.set_defaults(func=cmd_symmetry)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("mcqwalk: %(levelname)s: %(message)s"))
    log.handlers[:] = [handler]
    log.propagate = False
    log.setLevel(logging.INFO if args.verbose else logging.WARNING)
    if getattr(args, "steps", 0) < 0 or getattr(args, "t_max", 0) < 0:
        log.error("time must be >= 0")
        return 2
    try:
        return args.func(args)
    except (CLIError, ValueError, KeyError, OSError, spectral.QuadratureError) as err:
        msg = err.args[0] if isinstance(err, KeyError) and err.args else err
        log.error("%s", msg)
        return 1


if __name__ == "__main__":
    sys.exit(main())
