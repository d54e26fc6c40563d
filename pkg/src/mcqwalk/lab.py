"""Experiments built on the walk: law checks, parameter sweeps, fits, Q studies."""

from __future__ import annotations

import logging
import os
from dataclasses import asdict, dataclass, field
from typing import Literal, Sequence

import numpy as np

from . import spectral
from ._io import atomic_write, csv_text, json_text
from .catalog import CatalogEntry, Family, family as get_family
from .entanglement import SiteQ, i_concurrence_squared, q_lattice_profile, reduce, site_q
from .walk import (
    CoinState,
    StepConfig,
    apply_step,
    direct_moment,
    evolve,
    position_distribution,
    walk_for,
)

log = logging.getLogger(__name__)

FitModel = Literal["linear", "quadratic", "a0"]
LAW_RTOL = 1e-6


class DegenerateFitError(ValueError):
    pass


class DegenerateSweepError(ValueError):
    """The swept family never changes the regressor (e.g. IC^2 = 1 throughout)."""


@dataclass
class FitResult:
    """Ordinary least squares on one of three forms.

    ``linear``: y = c0 x + c1; ``quadratic``: y = c0 x^2; ``a0``: y = c0 x,
    used with x = 1 - IC^2 and y = <x>^2.
    """

    model: FitModel
    coefficients: list[float]
    residual_rms: float
    num_points: int

    def to_dict(self) -> dict:
        return asdict(self)


def fit_least_squares(x: Sequence[float], y: Sequence[float], model: FitModel) -> FitResult:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d of equal length")
    if model == "linear":
        if x.size < 2 or np.ptp(x) == 0:
            raise DegenerateFitError("linear fit needs at least two distinct x values")
        design = np.column_stack([x, np.ones_like(x)])
    elif model in ("quadratic", "a0"):
        col = x**2 if model == "quadratic" else x
        if x.size < 1 or not np.any(col):
            raise DegenerateFitError(f"{model} fit needs a nonzero regressor")
        design = col[:, None]
    else:
        raise ValueError(f"unknown fit model {model!r}")
    # normal equations; the designs here have at most two columns
    coef = np.linalg.solve(design.T @ design, design.T @ y)
    resid = y - design @ coef
    return FitResult(model, [float(c) for c in coef], float(np.sqrt(np.mean(resid**2))), int(x.size))


def ctilde_fits(t_lo: int = 1, t_hi: int = 100) -> tuple[FitResult, FitResult]:
    """Linear fit of c1_tilde(t) and quadratic-through-origin fit of c2_tilde(t)."""
    ts = np.arange(t_lo, t_hi + 1)
    c1 = [spectral.c1_tilde(int(t)) for t in ts]
    c2 = [spectral.c2_tilde(int(t)) for t in ts]
    return fit_least_squares(ts, c1, "linear"), fit_least_squares(ts, c2, "quadratic")


# ---------------------------------------------------------------------------
# law checks


def simulate_moments(coin: CoinState, active_qubit: int, t: int, lattice_size: int | None = None) -> tuple[float, float]:
    """Direct ``(<x>, <x^2>)`` after ``t`` steps on a moment-safe lattice."""
    state = evolve(walk_for(coin, t, lattice_size), StepConfig(active_qubit), t)
    return direct_moment(state, 1), direct_moment(state, 2)


@dataclass
class LawReport:
    law: Literal["mean", "variance"]
    state: str
    params: dict[str, float]
    active_qubit: int
    t: int
    ic2: float
    coherence: float
    c1_tilde: float
    c2_tilde: float
    mean_direct: float
    mean_integral: float
    second_moment: float
    lhs: float
    rhs: float
    residual: float
    tolerance: float
    passed: bool
    status: Literal["pass", "fail", "mixed-exception"]

    def to_dict(self) -> dict:
        return asdict(self)


def _law_report(law, entry: CatalogEntry, active_qubit: int, t: int, lattice_size: int | None) -> LawReport:
    coin = entry.coin
    mean, second = simulate_moments(coin, active_qubit, t, lattice_size)
    mean_int = spectral.moment_via_integral(coin, active_qubit, 1, t)
    c1 = spectral.c1_tilde(t)
    c2 = spectral.c2_tilde(t)
    ic2 = i_concurrence_squared(coin, active_qubit)
    coherence = abs(reduce(coin, [active_qubit]).entries[0, 1])
    if law == "mean":
        lhs, rhs = mean**2, c1**2 * (1.0 - ic2)
        tol = LAW_RTOL * max(c1**2, 1.0)
    else:
        lhs, rhs = second - mean**2, (c2 - c1**2) + c1**2 * ic2
        tol = LAW_RTOL * max(c2, 1.0)
    residual = abs(lhs - rhs)
    passed = residual < tol
    if passed:
        status = "pass"
    elif entry.entanglement_class == "mixed":
        status = "mixed-exception"
    else:
        status = "fail"
    return LawReport(
        law, entry.name, dict(entry.params), active_qubit, t, ic2, float(coherence), c1, c2,
        mean, mean_int, second, lhs, rhs, residual, tol, passed, status,
    )


def mean_law_check(entry: CatalogEntry, active_qubit: int, t: int, lattice_size: int | None = None) -> LawReport:
    """Compare ``<x>^2`` with ``c1_tilde^2 (1 - IC_i^2)``.

    Mixed-entanglement states that miss the law are labelled
    ``mixed-exception`` rather than ``fail``: their mean stays at zero.
    """
    return _law_report("mean", entry, active_qubit, t, lattice_size)


def variance_law_check(entry: CatalogEntry, active_qubit: int, t: int, lattice_size: int | None = None) -> LawReport:
    """Compare the simulated variance with ``c2 - c1^2 + c1^2 IC_i^2``."""
    return _law_report("variance", entry, active_qubit, t, lattice_size)


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class SweepPoint:
    param: float
    ic2: list[float]
    mean_direct: float
    mean_integral: float
    second_moment: float
    variance: float


@dataclass
class SweepReport:
    family: str
    param_name: str
    active_qubit: int
    t: int
    fixed: dict[str, float]
    points: list[SweepPoint] = field(default_factory=list)
    fit: FitResult | None = None
    c1_tilde_sq: float = 0.0

    @property
    def grid(self) -> list[float]:
        return [p.param for p in self.points]

    def regressor(self) -> np.ndarray:
        """``1 - IC^2`` of the active qubit at every grid point."""
        return np.array([1.0 - p.ic2[self.active_qubit - 1] for p in self.points])

    def mean_squared(self) -> np.ndarray:
        return np.array([p.mean_direct**2 for p in self.points])

    def to_dict(self) -> dict:
        out = asdict(self)
        out["fit"] = None if self.fit is None else self.fit.to_dict()
        return out

    def csv_text(self) -> str:
        m = len(self.points[0].ic2) if self.points else 0
        header = ["param", *(f"ic2_q{q}" for q in range(1, m + 1)),
                  "mean_direct", "mean_integral", "second_moment", "variance"]
        rows = ([p.param, *p.ic2, p.mean_direct, p.mean_integral, p.second_moment, p.variance]
                for p in self.points)
        return csv_text(header, rows)

    def fit_summary(self) -> dict:
        summary = {"family": self.family, "active_qubit": self.active_qubit, "t": self.t,
                   "c1_tilde_sq": self.c1_tilde_sq}
        if self.fit is not None:
            summary.update(self.fit.to_dict())
        return summary


def run_sweep(
    fam: Family | str,
    grid: Sequence[float] | None,
    active_qubit: int,
    t: int,
    fixed: dict[str, float] | None = None,
    lattice_size: int | None = None,
) -> SweepReport:
    """Simulate every grid point; no fitting."""
    fam = get_family(fam) if isinstance(fam, str) else fam
    fixed = dict(fixed or {})
    grid = fam.grid() if grid is None else np.asarray(grid, dtype=float)
    report = SweepReport(fam.name, fam.sweep_param, active_qubit, t, fixed,
                         c1_tilde_sq=spectral.c1_tilde(t) ** 2)
    for value in grid:
        entry = fam.at(value, **fixed)
        coin = entry.coin
        mean, second = simulate_moments(coin, active_qubit, t, lattice_size)
        report.points.append(SweepPoint(
            param=float(value),
            ic2=[i_concurrence_squared(coin, q) for q in range(1, coin.num_coins + 1)],
            mean_direct=mean,
            mean_integral=spectral.moment_via_integral(coin, active_qubit, 1, t),
            second_moment=second,
            variance=second - mean**2,
        ))
    return report


def fit_a0(report: SweepReport) -> FitResult:
    x = report.regressor()
    if np.ptp(x) < 1e-12:
        raise DegenerateSweepError(
            f"{report.family}: 1 - IC^2 of qubit {report.active_qubit} is constant "
            f"({x[0]:.6g}) over the sweep"
        )
    return fit_least_squares(x, report.mean_squared(), "a0")


def sweep_and_fit_a0(
    fam: Family | str,
    grid: Sequence[float] | None,
    active_qubit: int,
    t: int,
    fixed: dict[str, float] | None = None,
    lattice_size: int | None = None,
) -> SweepReport:
    """Sweep a pure-entanglement family and fit ``<x>^2 = A0 (1 - IC^2)``."""
    fam = get_family(fam) if isinstance(fam, str) else fam
    if grid is not None and len(grid) < 10:
        raise ValueError("a sweep needs at least 10 grid points")
    report = run_sweep(fam, grid, active_qubit, t, fixed, lattice_size)
    fit = fit_a0(report)
    sample = fam.at(report.points[0].param, **report.fixed)
    if sample.entanglement_class != "pure":
        raise ValueError(f"{fam.name} mixes entanglement kinds; A0 is not defined for it")
    report.fit = fit
    return report


def write_sweep(report: SweepReport, csv_path: str | os.PathLike, json_path: str | os.PathLike | None = None) -> None:
    atomic_write(csv_path, report.csv_text())
    if json_path is not None:
        atomic_write(json_path, json_text({"report": report.to_dict(), "fit": report.fit_summary()}))


# ---------------------------------------------------------------------------
# coin-space entanglement studies


def q_time_series(
    entry: CatalogEntry,
    active_qubit: int,
    sites: Sequence[int],
    t_max: int,
    lattice_size: int | None = None,
) -> list[tuple[int, list[SiteQ]]]:
    """Per-site Q at every t in 0..t_max; ``sites`` are lattice indices."""
    if entry.num_coins < 2:
        raise ValueError("global entanglement needs at least two coin qubits")
    config = StepConfig(active_qubit)
    state = walk_for(entry.coin, t_max, lattice_size)
    rows = []
    for t in range(t_max + 1):
        if t:
            state = apply_step(state, config)
        rows.append((t, [site_q(state, x) for x in sites]))
    return rows


def series_range(values: Sequence[float | None]) -> float:
    """Peak-to-peak over the defined entries (0 when fewer than two)."""
    vals = [v for v in values if v is not None]
    return float(np.ptp(vals)) if len(vals) > 1 else 0.0


def _mirror_asymmetry(values: Sequence[float | None], x0: int) -> float:
    worst = 0.0
    n = len(values)
    for d in range(1, min(x0, n - 1 - x0) + 1):
        left, right = values[x0 - d], values[x0 + d]
        if left is None or right is None:
            continue
        worst = max(worst, abs(right - left))
    return worst


def distribution_symmetry(
    entry: CatalogEntry, active_qubit: int, t: int, lattice_size: int | None = None
) -> tuple[float, float]:
    """Largest mirror difference about the start site of P(x) and of Q(x)."""
    state = evolve(walk_for(entry.coin, t, lattice_size), StepConfig(active_qubit), t)
    p = list(position_distribution(state))
    q = [s.q for s in q_lattice_profile(state)]
    return _mirror_asymmetry(p, state.start_site), _mirror_asymmetry(q, state.start_site)
