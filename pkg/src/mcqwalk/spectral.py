"""Momentum-space propagator of the single-coin walk and its moment integrals.

With the toss ``(1, i; i, 1)/sqrt(2)`` the k-space step is

    U_k = (e^{ik}, i e^{ik}; i e^{-ik}, e^{-ik}) / sqrt(2)

and ``U_k^t = (a, b; -b*, a*)`` with

    theta = arccos(cos k / sqrt 2),   r = sqrt(1 + sin^2 k)
    a = cos(t theta) + i (sin k / r) sin(t theta)
    b = i e^{ik} sin(t theta) / r

Moments follow from integrating ``(U_k^t)^dagger d^m/dk^m U_k^t`` over the
Brillouin zone. ``U_k`` as written corresponds to the transform
``psi(k) = sum_x e^{+ikx} psi(x)``, under which position is ``-i d/dk``.
``moment_via_integral`` therefore carries a factor ``(-i)^m`` and matches
the direct simulation sign for sign; ``c1_tilde`` keeps the ``i/2pi``
normalization, so it is negative and the single-coin ``|0>`` walk has
``<x> = -c1_tilde(t)``.
"""

from __future__ import annotations

import functools
import os
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ._io import write_csv
from .entanglement import reduce

SQRT2 = np.sqrt(2.0)
IMAG_TOL = 1e-10
CONVERGENCE_TOL = 1e-8

# finite-difference steps for the derivative oracle
FD_STEP_FIRST = 1e-6
FD_STEP_SECOND = 1e-4

DerivativeMode = Literal["analytic", "fd"]


class QuadratureError(RuntimeError):
    """Doubling the quadrature grid moved the result by more than the tolerance."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Uniform periodic trapezoidal rule on [-pi, pi) with ``num_points`` nodes.

    For the walk integrands, which are trigonometric polynomials of degree
    at most 2t in k, the rule is exact once N > 2t; N >= max(64, 32 t) is
    required regardless.
    """

    num_points: int
    rule: str = "trapezoidal"

    def __post_init__(self):
        if self.rule != "trapezoidal":
            raise ValueError(f"unsupported quadrature rule {self.rule!r}")
        if self.num_points < 64:
            raise ValueError("quadrature needs at least 64 points")

    @classmethod
    def for_time(cls, t: int) -> "QuadratureSpec":
        return cls(max(64, 32 * t))

    def check_resolves(self, t: int) -> None:
        if self.num_points < 32 * t:
            raise ValueError(f"{self.num_points} quadrature points cannot resolve t={t} (need >= {32 * t})")

    def nodes(self) -> NDArray[np.float64]:
        n = self.num_points
        return -np.pi + 2.0 * np.pi * np.arange(n) / n

    def doubled(self) -> "QuadratureSpec":
        return QuadratureSpec(2 * self.num_points, self.rule)


def _resolve_quad(quad: QuadratureSpec | None, t: int) -> QuadratureSpec:
    if quad is None:
        return QuadratureSpec.for_time(t)
    quad.check_resolves(t)
    return quad


def eigenvalues(k: ArrayLike) -> tuple[NDArray, NDArray]:
    """The two unimodular eigenvalues ``(cos k +- i sqrt(1 + sin^2 k)) / sqrt 2``."""
    k = np.asarray(k, dtype=float)
    r = np.sqrt(1.0 + np.sin(k) ** 2)
    return (np.cos(k) + 1j * r) / SQRT2, (np.cos(k) - 1j * r) / SQRT2


def theta(k: ArrayLike) -> NDArray[np.float64]:
    return np.arccos(np.cos(np.asarray(k, dtype=float)) / SQRT2)


def u_k(k: float) -> NDArray[np.complex128]:
    e = np.exp(1j * k)
    return np.array([[e, 1j * e], [1j / e, 1.0 / e]], dtype=np.complex128) / SQRT2


def _ab_derivs(k: ArrayLike, t: int, order: int) -> list[tuple[NDArray, NDArray]]:
    """``[(a, b), (a', b'), (a'', b'')][:order + 1]``, closed form, vectorized in k."""
    k = np.asarray(k, dtype=float)
    sk, ck = np.sin(k), np.cos(k)
    r = np.sqrt(1.0 + sk**2)
    th = np.arccos(ck / SQRT2)
    C, S = np.cos(t * th), np.sin(t * th)
    s = sk / r  # also d(theta)/dk
    g = 1.0 / r
    h = np.exp(1j * k)

    a = C + 1j * s * S
    b = 1j * h * S * g
    out = [(a, b)]
    if order == 0:
        return out

    s1 = ck / r**3
    g1 = -sk * ck / r**3
    C1 = -t * S * s
    S1 = t * C * s
    h1 = 1j * h
    a1 = C1 + 1j * (s1 * S + s * S1)
    b1 = 1j * (h1 * S * g + h * S1 * g + h * S * g1)
    out.append((a1, b1))
    if order == 1:
        return out

    s2 = -sk / r**3 - 3.0 * ck**2 * sk / r**5
    g2 = -np.cos(2.0 * k) / r**3 + 3.0 * sk**2 * ck**2 / r**5
    C2 = -(t**2) * C * s**2 - t * S * s1
    S2 = -(t**2) * S * s**2 + t * C * s1
    h2 = -h
    a2 = C2 + 1j * (s2 * S + 2.0 * s1 * S1 + s * S2)
    b2 = 1j * (
        h2 * S * g + h * S2 * g + h * S * g2
        + 2.0 * (h1 * S1 * g + h1 * S * g1 + h * S1 * g1)
    )
    out.append((a2, b2))
    return out


def _ab_fd(k: ArrayLike, t: int, order: int) -> tuple[NDArray, NDArray]:
    """Finite-difference derivative of (a, b): central 2-point for the first,
    5-point stencil for the second."""
    k = np.asarray(k, dtype=float)

    def ab(kk):
        return _ab_derivs(kk, t, 0)[0]

    if order == 1:
        h = FD_STEP_FIRST
        (ap, bp), (am, bm) = ab(k + h), ab(k - h)
        return (ap - am) / (2 * h), (bp - bm) / (2 * h)
    h = FD_STEP_SECOND
    vals = [ab(k + j * h) for j in (-2, -1, 0, 1, 2)]
    w = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12.0 * h * h)
    a2 = sum(wj * v[0] for wj, v in zip(w, vals))
    b2 = sum(wj * v[1] for wj, v in zip(w, vals))
    return a2, b2


def _as_matrix(a, b) -> NDArray[np.complex128]:
    """Stack (a, b) into ``(..., 2, 2)`` matrices ``(a, b; -b*, a*)``."""
    a = np.asarray(a)
    b = np.asarray(b)
    m = np.empty(a.shape + (2, 2), dtype=np.complex128)
    m[..., 0, 0] = a
    m[..., 0, 1] = b
    m[..., 1, 0] = -np.conj(b)
    m[..., 1, 1] = np.conj(a)
    return m


def u_k_power(k: ArrayLike, t: int) -> NDArray[np.complex128]:
    """``U_k**t`` from the closed form; shape (2, 2) or (len(k), 2, 2)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    a, b = _ab_derivs(k, t, 0)[0]
    return _as_matrix(a, b)


def u_k_power_eigen(k: float, t: int) -> NDArray[np.complex128]:
    """``T diag(l1, l2)**t T^-1`` with ``T = (c+, c-; 1, 1)``, for cross-checking."""
    root = np.sqrt(1.0 + np.sin(k) ** 2)
    cp = np.exp(1j * k) * (np.sin(k) + root)
    cm = np.exp(1j * k) * (np.sin(k) - root)
    l1, l2 = eigenvalues(k)
    T = np.array([[cp, cm], [1.0, 1.0]], dtype=np.complex128)
    D = np.diag([l1**t, l2**t])
    return T @ D @ np.linalg.inv(T)


def u_k_power_product(k: float, t: int) -> NDArray[np.complex128]:
    return np.linalg.matrix_power(u_k(k), t)


def _integrand(k: ArrayLike, t: int, order: int, mode: DerivativeMode) -> NDArray[np.complex128]:
    if t < 0:
        raise ValueError("t must be >= 0")
    k = np.asarray(k, dtype=float)
    if t == 0:
        return np.zeros(k.shape + (2, 2), dtype=np.complex128)
    derivs = _ab_derivs(k, t, order)
    a, b = derivs[0]
    if mode == "analytic":
        da, db = derivs[order]
    elif mode == "fd":
        da, db = _ab_fd(k, t, order)
    else:
        raise ValueError(f"unknown derivative mode {mode!r}")
    U = _as_matrix(a, b)
    dU = _as_matrix(da, db)
    return np.conj(np.swapaxes(U, -1, -2)) @ dU


def first_moment_integrand(k: ArrayLike, t: int, mode: DerivativeMode = "analytic") -> NDArray[np.complex128]:
    """``(U_k^t)^dagger d/dk U_k^t = (c1, d1; -d1*, c1*)``."""
    return _integrand(k, t, 1, mode)


def second_moment_integrand(k: ArrayLike, t: int, mode: DerivativeMode = "analytic") -> NDArray[np.complex128]:
    """``(U_k^t)^dagger d^2/dk^2 U_k^t = (c2, d2; -d2*, c2*)``."""
    return _integrand(k, t, 2, mode)


@dataclass(frozen=True)
class SpectralKernel:
    k: float
    t: int
    theta: float
    a: complex
    b: complex
    c1: complex
    d1: complex
    c2: complex
    d2: complex


def kernel(k: float, t: int) -> SpectralKernel:
    a, b = _ab_derivs(k, t, 0)[0]
    m1 = first_moment_integrand(k, t)
    m2 = second_moment_integrand(k, t)
    return SpectralKernel(
        k=float(k), t=t, theta=float(theta(k)), a=complex(a), b=complex(b),
        c1=complex(m1[0, 0]), d1=complex(m1[0, 1]),
        c2=complex(m2[0, 0]), d2=complex(m2[0, 1]),
    )


def integrate(values: NDArray, quad: QuadratureSpec) -> NDArray:
    """``(1/2pi) * integral over [-pi, pi]`` of samples taken at ``quad.nodes()``."""
    return np.mean(values, axis=0)


@functools.lru_cache(maxsize=1024)
def _moment_matrix_cached(t: int, order: int, num_points: int) -> NDArray[np.complex128]:
    quad = QuadratureSpec(num_points)
    k = quad.nodes()
    out = integrate(_integrand(k, t, order, "analytic"), quad)
    out.setflags(write=False)
    return out


def moment_matrix(t: int, order: int, quad: QuadratureSpec | None = None, *, check: bool = True) -> NDArray[np.complex128]:
    """Brillouin-zone average ``(1/2pi) int dk (U_k^t)^dagger d^m U_k^t`` (2x2).

    With ``check`` the average is recomputed on a doubled grid and
    QuadratureError raised if any entry moves by more than 1e-8.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    quad = _resolve_quad(quad, t)
    value = _moment_matrix_cached(t, order, quad.num_points)
    if check:
        finer = _moment_matrix_cached(t, order, 2 * quad.num_points)
        shift = float(np.max(np.abs(finer - value)))
        if shift > CONVERGENCE_TOL * max(1.0, float(np.max(np.abs(value)))):
            raise QuadratureError(f"t={t}: doubling N shifted the integral by {shift:.3e}")
    return value


def _real(z: complex, what: str) -> float:
    if abs(z.imag) > IMAG_TOL * max(1.0, abs(z.real)):
        raise QuadratureError(f"{what} has imaginary part {z.imag:.3e}")
    return float(z.real)


def c1_tilde(t: int, quad: QuadratureSpec | None = None) -> float:
    """``(i/2pi) int dk c1``; asymptotically linear in t with negative slope."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        return 0.0
    return _real(1j * moment_matrix(t, 1, quad)[0, 0], f"c1_tilde({t})")


def c2_tilde(t: int, quad: QuadratureSpec | None = None) -> float:
    """``-(1/2pi) int dk c2``; equals the state-independent second moment."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        return 0.0
    return _real(-moment_matrix(t, 2, quad)[0, 0], f"c2_tilde({t})")


def moment_via_integral(
    coin,
    active_qubit: int,
    m: int,
    t: int,
    quad: QuadratureSpec | None = None,
) -> float:
    """``<x^m>`` from the k-space integral; spectator qubits enter only through
    the reduced density matrix of the active qubit."""
    if m not in (1, 2):
        raise ValueError("only moments m = 1, 2 are supported")
    if t == 0:
        return 0.0
    rho = reduce(coin, [active_qubit]).entries
    integral = moment_matrix(t, m, quad)
    value = (-1j) ** m * np.trace(rho @ integral)
    return _real(complex(value), f"<x^{m}>")


def ctilde_table(t_max: int, quad_points: int | None = None) -> list[tuple[int, float, float]]:
    rows = []
    for t in range(t_max + 1):
        quad = None if quad_points is None else QuadratureSpec(max(quad_points, 64))
        rows.append((t, c1_tilde(t, quad), c2_tilde(t, quad)))
    return rows


def write_ctilde_csv(path: str | os.PathLike, rows) -> None:
    write_csv(path, ("t", "c1_tilde", "c2_tilde"), rows)
