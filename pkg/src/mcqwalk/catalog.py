"""Parameterized example coin states with known entanglement structure.

Each constructor returns a :class:`CatalogEntry` carrying the normalized coin
state, its parameters, whether the state holds a single kind of multipartite
entanglement ("pure") or several ("mixed"), and closed-form squared
i-concurrences per qubit.

The spin-chain origin of the psi/phi families is not modelled: amplitudes
(or the anisotropy ``delta`` for psi6 and psi78) are taken as inputs.
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from ._io import atomic_write, fmt
from .walk import NORM_TOL, CoinState

EntanglementClass = Literal["pure", "mixed"]


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    coin: CoinState
    params: dict[str, float]
    entanglement_class: EntanglementClass
    expected_ic_squared: dict[int, float] = field(default_factory=dict)

    @property
    def num_coins(self) -> int:
        return self.coin.num_coins


def _state(m: int, terms: dict[str, float]) -> CoinState:
    amps = np.zeros(1 << m, dtype=np.complex128)
    for bits, value in terms.items():
        amps[int(bits, 2)] += value
    return CoinState(amps)


def _check_norm(total: float, what: str) -> None:
    if abs(total - 1.0) > NORM_TOL:
        raise ValueError(f"{what} = {total:.12g}, must equal 1")


def gamma_ghz(gamma: float) -> CatalogEntry:
    """``gamma |000> + sqrt(1 - gamma^2) |111>``."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must lie in [0, 1] (got {gamma})")
    coin = _state(3, {"000": gamma, "111": math.sqrt(1.0 - gamma * gamma)})
    ic2 = 4.0 * gamma**2 * (1.0 - gamma**2)
    return CatalogEntry("gammaGHZ", coin, {"gamma": gamma}, "pure", {q: ic2 for q in (1, 2, 3)})


def kappas(delta: float) -> tuple[float, float]:
    """Amplitudes (kappa1, kappa2) of the psi6 family; 2 kappa1^2 + kappa2^2 = 1."""
    eta = math.sqrt(12.0 + delta * (delta - 4.0))
    chi = eta + delta - 2.0
    return math.sqrt(chi) / (2.0 * math.sqrt(eta)), -2.0 / (math.sqrt(chi) * math.sqrt(eta))


def psi6(delta: float) -> CatalogEntry:
    """``k1 |001> + k2 |010> + k1 |100>``: two-qubit entanglement only."""
    k1, k2 = kappas(delta)
    coin = _state(3, {"001": k1, "010": k2, "100": k1})
    outer = 1.0 - k2**4
    middle = 4.0 * (k2**2 - k2**4)
    return CatalogEntry(
        "psi6", coin, {"delta": delta, "kappa1": k1, "kappa2": k2}, "pure",
        {1: outer, 2: middle, 3: outer},
    )


def psi78(delta: float) -> CatalogEntry:
    """Equal superposition of the psi7 and psi8 eigenstates; mixes 2- and 3-qubit entanglement."""
    k1, k2 = kappas(delta)
    r = 1.0 / math.sqrt(2.0)
    coin = _state(3, {
        "001": k1 * r, "010": k2 * r, "011": k1 * r,
        "100": k1 * r, "101": k2 * r, "110": k1 * r,
    })
    # every reduction has rho00 = rho11 = 1/2; coherence k1 k2 (outer), k1^2 (middle)
    outer = 1.0 - 4.0 * k1**2 * k2**2
    middle = 1.0 - 4.0 * k1**4
    return CatalogEntry(
        "psi78", coin, {"delta": delta, "kappa1": k1, "kappa2": k2}, "mixed",
        {1: outer, 2: middle, 3: outer},
    )


def phi1(alpha1: float, alpha2: float, alpha3: float) -> CatalogEntry:
    """``a1 |1110> + a2 |1011> + a3 |0111> - a3 |1101>``; requires a1^2 + a2^2 + 2 a3^2 = 1."""
    _check_norm(alpha1**2 + alpha2**2 + 2.0 * alpha3**2, "alpha1^2 + alpha2^2 + 2 alpha3^2")
    coin = _state(4, {"1110": alpha1, "1011": alpha2, "0111": alpha3, "1101": -alpha3})

    def ic2(p):
        return 4.0 * (p - p * p)

    a1s, a2s, a3s = alpha1**2, alpha2**2, alpha3**2
    return CatalogEntry(
        "phi1", coin, {"alpha1": alpha1, "alpha2": alpha2, "alpha3": alpha3}, "pure",
        {1: ic2(a3s), 2: ic2(a2s), 3: ic2(a3s), 4: ic2(a1s)},
    )


def phi1_from_alpha3(alpha3: float, omega: float = math.pi / 4) -> CatalogEntry:
    """phi1 with the remaining weight split as alpha1 = R cos(omega), alpha2 = R sin(omega)."""
    rest = 1.0 - 2.0 * alpha3**2
    if rest < -NORM_TOL:
        raise ValueError(f"alpha3 = {alpha3} exceeds 1/sqrt(2)")
    radius = math.sqrt(max(rest, 0.0))
    entry = phi1(radius * math.cos(omega), radius * math.sin(omega), alpha3)
    entry.params["omega"] = omega
    return entry


def phi2(beta1: float, beta2: float | None = None) -> CatalogEntry:
    """Four-qubit state with IC^2 = 1 on every qubit; requires 4 b1^2 + 2 b2^2 = 1.

    ``beta2`` defaults to the nonnegative root of the norm constraint.
    """
    if beta2 is None:
        rest = (1.0 - 4.0 * beta1**2) / 2.0
        if rest < -NORM_TOL:
            raise ValueError(f"beta1 = {beta1} exceeds 1/2")
        beta2 = math.sqrt(max(rest, 0.0))
    _check_norm(4.0 * beta1**2 + 2.0 * beta2**2, "4 beta1^2 + 2 beta2^2")
    coin = _state(4, {
        "0011": -beta1, "0110": beta1, "1001": -beta1, "1100": beta1,
        "0101": -beta2, "1010": beta2,
    })
    return CatalogEntry(
        "phi2", coin, {"beta1": beta1, "beta2": beta2}, "mixed", {q: 1.0 for q in (1, 2, 3, 4)},
    )


@dataclass(frozen=True)
class Family:
    """How a catalog family is swept: one scanned parameter, the rest fixed."""

    name: str
    num_coins: int
    sweep_param: str
    default_range: tuple[float, float]
    default_points: int
    build: Callable[..., CatalogEntry]

    def grid(self, points: int | None = None) -> np.ndarray:
        lo, hi = self.default_range
        return np.linspace(lo, hi, points or self.default_points)

    def at(self, value: float, **fixed: float) -> CatalogEntry:
        return self.build(**{self.sweep_param: float(value)}, **fixed)


FAMILIES: dict[str, Family] = {
    "gammaGHZ": Family("gammaGHZ", 3, "gamma", (0.0, 1.0), 101, gamma_ghz),
    "psi6": Family("psi6", 3, "delta", (-10.0, 10.0), 201, psi6),
    "psi78": Family("psi78", 3, "delta", (-10.0, 10.0), 201, psi78),
    "phi1": Family("phi1", 4, "alpha3", (0.0, 1.0 / math.sqrt(2.0)), 101, phi1_from_alpha3),
    "phi2": Family("phi2", 4, "beta1", (0.0, 0.5), 101, phi2),
}


def family(name: str) -> Family:
    for key, fam in FAMILIES.items():
        if key.lower() == name.lower():
            return fam
    raise KeyError(f"unknown catalog family {name!r}; choose from {', '.join(FAMILIES)}")


# ---------------------------------------------------------------------------
# state specs and state files

_SPEC_RE = re.compile(r"^(?P<name>[A-Za-z0-9_]+)(?::(?P<args>.*))?$")


def parse_params(text: str) -> dict[str, float]:
    params: dict[str, float] = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"parameter {item!r} is not of the form key=value")
        params[key.strip()] = float(value)
    return params


def from_spec(spec: str) -> CatalogEntry:
    """Build a catalog entry from ``name:key=value,...``.

    ``phi1`` accepts either all three amplitudes or ``alpha3`` with an
    optional ``omega``; ``phi2`` accepts ``beta1`` with optional ``beta2``.
    """
    match = _SPEC_RE.match(spec.strip())
    if not match:
        raise ValueError(f"malformed state spec {spec!r}")
    fam = family(match["name"])
    params = parse_params(match["args"] or "")
    try:
        if fam.name == "phi1" and "alpha1" in params:
            return phi1(params["alpha1"], params["alpha2"], params["alpha3"])
        return fam.build(**params)
    except (KeyError, TypeError) as err:
        raise ValueError(f"bad parameters for {fam.name}: {err}") from None


def write_state_file(path: str | os.PathLike, coin: CoinState) -> None:
    """``coins=M`` then one ``<bitstring> <re> <im>`` line per nonzero amplitude."""
    m = coin.num_coins
    lines = [f"coins={m}"]
    for idx, amp in enumerate(coin.amplitudes):
        if amp != 0:
            lines.append(f"{idx:0{m}b} {fmt(amp.real)} {fmt(amp.imag)}")
    atomic_write(path, "\n".join(lines) + "\n")


def read_state_file(path: str | os.PathLike) -> CoinState:
    """Load a state file; renormalizes deviations below 1e-9, rejects larger ones."""
    with open(path) as fh:
        lines = [ln.split("#", 1)[0].strip() for ln in fh]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0].startswith("coins="):
        raise ValueError(f"{path}: first line must be 'coins=M'")
    m = int(lines[0].partition("=")[2])
    if m < 1:
        raise ValueError(f"{path}: coins must be >= 1")
    amps = np.zeros(1 << m, dtype=np.complex128)
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) not in (2, 3) or len(parts[0]) != m or set(parts[0]) - {"0", "1"}:
            raise ValueError(f"{path}:{lineno}: expected '<{m}-bit string> <re> [<im>]'")
        im = float(parts[2]) if len(parts) == 3 else 0.0
        amps[int(parts[0], 2)] += complex(float(parts[1]), im)
    return CoinState(amps)


def load_coin(spec: str) -> CoinState:
    """Coin state from a catalog spec or ``file:<path>``."""
    if spec.startswith("file:"):
        return read_state_file(spec[len("file:"):])
    return from_spec(spec).coin
