"""Reduced density matrices, i-concurrence and the global entanglement Q."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import NDArray

from ._io import write_csv
from .walk import DEFAULT_WEIGHT_THRESHOLD, CoinState, UndefinedSiteError, WalkState, coin_state_at


@dataclass(frozen=True)
class DensityMatrix:
    entries: NDArray[np.complex128]
    subset: tuple[int, ...]

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def _amplitudes(coin) -> NDArray[np.complex128]:
    return np.asarray(getattr(coin, "amplitudes", coin), dtype=np.complex128).reshape(-1)


def reduce(coin: CoinState, keep: Iterable[int]) -> DensityMatrix:
    """Partial trace of ``|coin><coin|`` onto the (1-based) qubits in ``keep``.

    The retained qubits keep the order given in ``keep``.
    """
    amps = _amplitudes(coin)
    m = amps.size.bit_length() - 1
    keep = tuple(int(q) for q in keep)
    if not keep or len(set(keep)) != len(keep) or any(not 1 <= q <= m for q in keep):
        raise ValueError(f"invalid qubit subset {keep} for {m} qubit(s)")
    axes = [q - 1 for q in keep]
    rest = [a for a in range(m) if a not in axes]
    psi = np.transpose(amps.reshape((2,) * m), axes + rest).reshape(1 << len(keep), -1)
    return DensityMatrix(psi @ psi.conj().T, keep)


def purity(rho: DensityMatrix) -> float:
    """``Tr(rho^2)``; for Hermitian rho this is the squared Frobenius norm."""
    e = rho.entries
    return float(np.real(np.vdot(e, e)))


def i_concurrence_squared(coin: CoinState, qubit: int) -> float:
    return 2.0 * (1.0 - purity(reduce(coin, [qubit])))


def i_concurrence(coin: CoinState, qubit: int) -> float:
    """``sqrt(2 (1 - Tr rho_i^2))`` for the single-qubit reduction onto ``qubit``."""
    return float(np.sqrt(max(i_concurrence_squared(coin, qubit), 0.0)))


def global_q(coin: CoinState) -> float:
    """Meyer-Wallach Q: twice one minus the average single-qubit purity."""
    amps = _amplitudes(coin)
    m = amps.size.bit_length() - 1
    if m < 2:
        raise ValueError("global entanglement needs at least two qubits")
    mean_purity = sum(purity(reduce(amps, [q])) for q in range(1, m + 1)) / m
    return 2.0 * (1.0 - mean_purity)


@dataclass(frozen=True)
class SiteQ:
    site: int
    weight: float
    q: float | None  # None where the site carries no walker


def site_q(state: WalkState, x: int, threshold: float = DEFAULT_WEIGHT_THRESHOLD) -> SiteQ:
    try:
        coin, weight = coin_state_at(state, x, threshold)
    except UndefinedSiteError as err:
        return SiteQ(x, err.weight, None)
    return SiteQ(x, weight, global_q(coin))


def q_lattice_profile(
    state: WalkState,
    weight_threshold: float = DEFAULT_WEIGHT_THRESHOLD,
    sites: Sequence[int] | None = None,
) -> list[SiteQ]:
    if state.num_coins < 2:
        raise ValueError("global entanglement needs at least two coin qubits")
    sites = range(state.lattice_size) if sites is None else sites
    return [site_q(state, x, weight_threshold) for x in sites]


def write_profile_csv(path: str | os.PathLike, profile: Sequence[SiteQ]) -> None:
    write_csv(path, ("site", "weight", "Q"), ((p.site, p.weight, p.q) for p in profile))
