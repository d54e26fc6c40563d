"""Dense state-vector simulation of the multi-coin walk.

Coin basis states are labelled ``|q1 q2 ... qM>`` with qubit 1 the most
significant bit, so qubit ``i`` is axis ``i - 1`` of the amplitude tensor
reshaped to ``(2,) * M``. The lattice is cyclic; walks used for moments must
be sized so the support never reaches the seam.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from ._io import write_csv

NORM_TOL = 1e-9
UNITARY_TOL = 1e-12
DEFAULT_WEIGHT_THRESHOLD = 1e-14

#: Unbiased toss: equal probability to move left or right after one step.
TOSS = np.array([[1.0, 1.0j], [1.0j, 1.0]], dtype=np.complex128) / np.sqrt(2.0)


class WraparoundError(ValueError):
    """The walk support would cross (or has crossed) the cyclic seam."""


class UndefinedSiteError(LookupError):
    """No walker weight at the requested site; the coin state is undefined."""

    def __init__(self, site: int, weight: float):
        super().__init__(f"site {site} carries weight {weight:.3e}; coin state undefined")
        self.site = site
        self.weight = weight


def default_lattice_size(t: int) -> int:
    return 2 * t + 21


@dataclass(frozen=True)
class CoinState:
    """Normalized state of an M-qubit coin register."""

    amplitudes: NDArray[np.complex128]
    num_coins: int = field(init=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        dim = amps.size
        m = dim.bit_length() - 1
        if m < 1 or dim != 1 << m:
            raise ValueError(f"coin vector length {dim} is not 2**M with M >= 1")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"coin state not normalized (norm = {norm:.12g})")
        amps = amps / norm
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "num_coins", m)

    @classmethod
    def from_basis(cls, bits: str) -> "CoinState":
        """Computational basis state from a bitstring such as ``"010"``."""
        amps = np.zeros(1 << len(bits), dtype=np.complex128)
        amps[int(bits, 2)] = 1.0
        return cls(amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def tensor(self) -> NDArray[np.complex128]:
        return self.amplitudes.reshape((2,) * self.num_coins)


@dataclass(frozen=True)
class StepConfig:
    """Which coin qubit drives the walk, and the 2x2 toss applied to it."""

    active_qubit: int = 1
    toss: NDArray[np.complex128] = field(default_factory=lambda: TOSS.copy())

    def __post_init__(self):
        toss = np.asarray(self.toss, dtype=np.complex128)
        if toss.shape != (2, 2):
            raise ValueError("toss must be a 2x2 matrix")
        if not np.allclose(toss @ toss.conj().T, np.eye(2), rtol=0, atol=UNITARY_TOL):
            raise ValueError("toss is not unitary")
        if self.active_qubit < 1:
            raise ValueError(f"active_qubit must be >= 1 (got {self.active_qubit})")
        object.__setattr__(self, "toss", toss)


@dataclass(frozen=True)
class WalkState:
    """Walker plus coin register: amplitudes indexed ``[coin_index, site]``.

    ``for_moments`` marks walks whose moments will be read off; stepping such
    a walk refuses to let the support reach the cyclic seam.
    """

    amplitudes: NDArray[np.complex128]
    start_site: int
    steps_taken: int = 0
    for_moments: bool = False

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.ndim != 2:
            raise ValueError("amplitudes must have shape (2**M, n)")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def num_coins(self) -> int:
        return self.amplitudes.shape[0].bit_length() - 1

    @property
    def lattice_size(self) -> int:
        return self.amplitudes.shape[1]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def max_safe_steps(self) -> int:
        """Largest step count for which no amplitude has touched the seam."""
        n = self.lattice_size
        return min(self.start_site, n - 1 - self.start_site, (n - 2) // 2)

    def displacements(self) -> NDArray[np.int64]:
        return np.arange(self.lattice_size) - self.start_site


def new_walk_state(
    coin: CoinState,
    lattice_size: int,
    start_site: int | None = None,
    *,
    for_moments: bool = False,
) -> WalkState:
    """Product state ``coin (x) |start_site>``; the start defaults to the middle."""
    if not isinstance(coin, CoinState):
        coin = CoinState(coin)
    if lattice_size < 1:
        raise ValueError("lattice_size must be >= 1")
    if start_site is None:
        start_site = lattice_size // 2
    if not 0 <= start_site < lattice_size:
        raise ValueError(f"start_site {start_site} outside lattice of size {lattice_size}")
    amps = np.zeros((coin.dim, lattice_size), dtype=np.complex128)
    amps[:, start_site] = coin.amplitudes
    return WalkState(amps, start_site, 0, for_moments)


def walk_for(coin: CoinState, t: int, lattice_size: int | None = None) -> WalkState:
    """Moment-safe walk centered on a lattice large enough for ``t`` steps."""
    n = default_lattice_size(t) if lattice_size is None else lattice_size
    if n < 2 * t + 2:
        raise WraparoundError(f"lattice of {n} sites too small for {t} steps (need >= {2 * t + 2})")
    return new_walk_state(coin, n, n // 2, for_moments=True)


def apply_step(state: WalkState, config: StepConfig) -> WalkState:
    """One application of toss-then-conditional-shift on the active qubit."""
    m = state.num_coins
    i = config.active_qubit
    if not 1 <= i <= m:
        raise ValueError(f"active_qubit {i} out of range for {m} coin(s)")
    if state.for_moments and state.steps_taken + 1 > state.max_safe_steps():
        raise WraparoundError(
            f"step {state.steps_taken + 1} would wrap a lattice of {state.lattice_size} sites"
        )
    n = state.lattice_size
    psi = state.amplitudes.reshape((2,) * m + (n,))
    # active qubit to the front: psi[c, rest..., x]
    psi = np.moveaxis(psi, i - 1, 0)
    psi = np.tensordot(config.toss, psi, axes=([1], [0]))
    shifted = np.empty_like(psi)
    shifted[0] = np.roll(psi[0], 1, axis=-1)
    shifted[1] = np.roll(psi[1], -1, axis=-1)
    out = np.moveaxis(shifted, 0, i - 1).reshape(1 << m, n)
    return WalkState(out, state.start_site, state.steps_taken + 1, state.for_moments)


def evolve(state: WalkState, config: StepConfig, t: int) -> WalkState:
    if t < 0:
        raise ValueError("t must be >= 0")
    if state.for_moments and state.steps_taken + t > state.max_safe_steps():
        raise WraparoundError(
            f"{state.steps_taken + t} steps would wrap a lattice of {state.lattice_size} sites"
        )
    for _ in range(t):
        state = apply_step(state, config)
    return state


def position_distribution(state: WalkState) -> NDArray[np.float64]:
    return np.sum(np.abs(state.amplitudes) ** 2, axis=0)


def direct_moment(state: WalkState, m: int) -> float:
    """``sum_x P(x) (x - x0)**m`` for m in {1, 2}."""
    if m not in (1, 2):
        raise ValueError("only moments m = 1, 2 are supported")
    if state.steps_taken > state.max_safe_steps():
        raise WraparoundError("walk support has reached the cyclic seam")
    p = position_distribution(state)
    return float(p @ state.displacements().astype(float) ** m)


def coin_state_at(
    state: WalkState, x: int, threshold: float = DEFAULT_WEIGHT_THRESHOLD
) -> tuple[CoinState, float]:
    """Per-site coin state, renormalized, and the walker weight at ``x``.

    Raises UndefinedSiteError when the weight does not exceed ``threshold``.
    """
    column = state.amplitudes[:, x]
    weight = float(np.real(np.vdot(column, column)))
    if weight <= threshold:
        raise UndefinedSiteError(x, weight)
    return CoinState(column / np.sqrt(weight)), weight


def write_state_csv(path: str | os.PathLike, state: WalkState) -> None:
    rows = (
        (c, x, state.amplitudes[c, x].real, state.amplitudes[c, x].imag)
        for c in range(state.amplitudes.shape[0])
        for x in range(state.lattice_size)
    )
    write_csv(path, ("coin_index", "site", "re", "im"), rows)


def distribution_rows(state: WalkState) -> list[tuple[int, float]]:
    return [(x, p) for x, p in enumerate(position_distribution(state))]


def write_distribution_csv(path: str | os.PathLike, state: WalkState) -> None:
    write_csv(path, ("site", "probability"), distribution_rows(state))
