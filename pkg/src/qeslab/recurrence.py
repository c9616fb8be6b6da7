"""Four-term recurrence for the quartic model and its truncation determinant.

With ``psi = (sum P_k x^k, sum Q_k x^k)`` the gauged eigenvalue equation reads

    A_k (P_k, Q_{k+2}) + B_k (P_{k-1}, Q_{k+1}) + C_k (P_{k-2}, Q_k)
        + D_k (P_{k-3}, Q_{k-1}) = 0.

Row 1 of the ``k = 0, 1`` relations is empty, so the series is fixed by the
four free values ``(P_0, P_1, Q_0, Q_1)``. Each ``P_k``, ``Q_k`` is therefore a
linear form in those four numbers, stored as a length-4 coefficient row.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import CountMismatch
from .models import QuarticParams

FREE_PARAMS = ("P0", "P1", "Q0", "Q1")


class RecurrenceCoeffs(NamedTuple):
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray


def recurrence_coeffs(p: QuarticParams, E: complex, k: int) -> RecurrenceCoeffs:
    """The 2x2 matrices ``A_k, B_k, C_k, D_k`` at energy ``E``."""
    b = p.b_shift
    lw = p.lam * p.w_tilde
    base = -p.d - b**2 / 4 + E
    A = np.array([[k * (k - 1), 0], [-p.w_tilde, (k + 2) * (k + 1)]], dtype=np.complex128)
    B = np.array([[(1j * b + lw) * (k - 1), 0], [0, (-lw + 1j * b) * (k + 1)]], dtype=np.complex128)
    C = np.array(
        [[base - p.a * (k - 2) - p.a / 2, p.w_tilde * p.lam**2 * k * (k - 1)],
         [0, base - p.a * k + p.a / 2]],
        dtype=np.complex128,
    )
    D = -2j * (k - p.n - 1) * np.eye(2, dtype=np.complex128)
    return RecurrenceCoeffs(A, B, C, D)


@dataclass(frozen=True)
class Series:
    """``P[k]`` and ``Q[k]`` as rows of coefficients on ``(P0, P1, Q0, Q1)``."""

    P: np.ndarray
    Q: np.ndarray

    def evaluate(self, free) -> tuple[np.ndarray, np.ndarray]:
        free = np.asarray(free, dtype=np.complex128)
        return self.P @ free, self.Q @ free


def _forward(p: QuarticParams, E: np.ndarray, k_max: int):
    """Vectorized forward solve; returns ``P, Q`` of shape ``(k_max+1, len(E), 4)``."""
    E = np.atleast_1d(np.asarray(E, dtype=np.complex128))
    m = E.size
    P = np.zeros((k_max + 1, m, 4), dtype=np.complex128)
    Q = np.zeros((k_max + 3, m, 4), dtype=np.complex128)
    P[0, :, 0] = P[1, :, 1] = Q[0, :, 2] = Q[1, :, 3] = 1.0
    zero = np.zeros((m, 4), dtype=np.complex128)

    def at(seq, i):
        return seq[i] if i >= 0 else zero

    col = E[:, None]
    for k in range(k_max + 1):
        # C_k is affine in E: C_k(E) = C_k(0) + E * I
        A, B, C, D = recurrence_coeffs(p, 0.0, k)
        if k >= 2:
            rest = (B[0, 0] * at(P, k - 1) + (C[0, 0] + col) * at(P, k - 2)
                    + C[0, 1] * Q[k] + D[0, 0] * at(P, k - 3))
            P[k] = -rest / A[0, 0]
        rest = A[1, 0] * P[k] + B[1, 1] * Q[k + 1] + (C[1, 1] + col) * Q[k] + D[1, 1] * at(Q, k - 1)
        Q[k + 2] = -rest / A[1, 1]
    return P, Q[: k_max + 1]


def forward_generate(p: QuarticParams, E: complex, k_max: int | None = None) -> Series:
    """Solve the recurrence forward up to ``k_max`` (default ``n + 8``).

    Row 2 at ``k`` gives ``Q_{k+2}``; row 1 at ``k >= 2`` gives ``P_k``.
    Negative indices are zero.
    """
    if k_max is None:
        k_max = p.n + 8
    if k_max < p.n + 3:
        raise ValueError(f"k_max must be >= n + 3 = {p.n + 3}")
    P, Q = _forward(p, np.array([E]), k_max)
    return Series(P[:, 0, :], Q[:, 0, :])


def qes_system(p: QuarticParams, E: complex) -> np.ndarray:
    """Rows ``P_n, P_{n-1}, Q_{n+2}, Q_{n+1}`` as forms on the free parameters."""
    return qes_systems(p, np.array([E]))[0]


def qes_systems(p: QuarticParams, E) -> np.ndarray:
    """:func:`qes_system` for an array of energies, shape ``(len(E), 4, 4)``."""
    n = p.n
    P, Q = _forward(p, E, n + 3)
    return np.stack([P[n], P[n - 1], Q[n + 2], Q[n + 1]], axis=1)


def qes_determinant(p: QuarticParams, E):
    """Determinant of the truncation system; it vanishes exactly at QES energies.

    Accepts a scalar or an array of energies.
    """
    dets = np.linalg.det(qes_systems(p, E))
    return complex(dets[0]) if np.ndim(E) == 0 else dets


def null_solution(p: QuarticParams, E: complex) -> np.ndarray:
    """Unit free-parameter vector closest to the truncation system's kernel."""
    _, _, vh = np.linalg.svd(qes_system(p, E))
    return vh[-1].conj()


def truncation_tail(p: QuarticParams, E: complex, k_max: int | None = None) -> float:
    """Largest tail coefficient past the imposed zeros, relative to the series size.

    Propagates the null solution to ``k_max`` (default ``n + 8``) and returns
    ``max(|P_k|, k >= n-1; |Q_k|, k >= n+1) / max(all |P_k|, |Q_k|)``.
    """
    s = forward_generate(p, E, k_max)
    P, Q = s.evaluate(null_solution(p, E))
    scale = max(np.max(np.abs(P)), np.max(np.abs(Q)))
    tail = max(np.max(np.abs(P[p.n - 1:])), np.max(np.abs(Q[p.n + 1:])))
    return float(tail / scale)


def degree_estimate(p: QuarticParams, radius: float = 1e4, n_angles: int = 16) -> float:
    """Log-slope estimate of the determinant's polynomial degree in ``E``."""
    angles = 2 * np.pi * (np.arange(n_angles) + 0.5) / n_angles
    r1, r2 = radius, 2 * radius
    d1 = np.abs(qes_determinant(p, r1 * np.exp(1j * angles)))
    d2 = np.abs(qes_determinant(p, r2 * np.exp(1j * angles)))
    return float(np.median(np.log(d2 / d1) / np.log(r2 / r1)))


def winding_number(p: QuarticParams, radius: float, samples: int = 2048) -> int:
    """Zeros of the determinant inside ``|E| < radius`` by the argument principle."""
    t = 2 * np.pi * np.arange(samples + 1) / samples
    phase = np.unwrap(np.angle(qes_determinant(p, radius * np.exp(1j * t))))
    return int(round((phase[-1] - phase[0]) / (2 * np.pi)))


def auto_search_radius(p: QuarticParams, expected: int, start: float = 4.0, max_doublings: int = 20) -> float:
    """Radius (with a 1.5x margin) of a disc holding at least ``expected`` zeros."""
    r = start
    for _ in range(max_doublings):
        if winding_number(p, r) >= expected:
            return 1.5 * r
        r *= 2
    return r


def _newton(f, z0: complex, deflate=(), max_iter: int = 100, tol: float = 1e-14):
    z = complex(z0)
    step = np.inf
    for _ in range(max_iter):
        scale = max(1.0, abs(z))
        h = 1e-6 * scale
        fz = f(z)
        if fz == 0:
            return z
        dfz = (f(z + h) - f(z - h)) / (2 * h)
        # Maehly deflation: Newton on f / prod(z - r)
        corr = dfz / fz - sum(1.0 / (z - r) for r in deflate)
        if corr == 0 or not np.isfinite(corr):
            return None
        step = 1.0 / corr
        z -= step
        if abs(step) <= tol * scale:
            return z
    return z if abs(step) <= 1e-9 * max(1.0, abs(z)) else None


def find_qes_energies(
    p: QuarticParams,
    box: tuple[float, float, float, float] | None = None,
    grid: int = 41,
    dedup_tol: float = 1e-7,
) -> np.ndarray:
    """Zeros of :func:`qes_determinant` in the box ``(re_min, re_max, im_min, im_max)``.

    Seeds are the local minima of ``|det|`` on a ``grid x grid`` lattice; each
    is polished by finite-difference Newton. Missing roots (e.g. repeated
    ones) are then hunted with Maehly-deflated Newton, started from every
    seed, until ``2n`` roots are held.
    Without a box, a square enclosing ``2n`` zeros (by winding number) is used.
    A :class:`CountMismatch` warning is issued when the count is not ``2n``.
    """
    expected = 2 * p.n
    if box is None:
        r = auto_search_radius(p, expected)
        box = (-r, r, -r, r)
    re_min, re_max, im_min, im_max = box
    xs = np.linspace(re_min, re_max, grid)
    ys = np.linspace(im_min, im_max, grid)
    X, Y = np.meshgrid(xs, ys)
    logm = np.log(np.abs(qes_determinant(p, (X + 1j * Y).ravel())) + np.finfo(float).tiny)
    logm = logm.reshape(X.shape)

    seeds = []
    for i in range(grid):
        for j in range(grid):
            nb = logm[max(i - 1, 0): i + 2, max(j - 1, 0): j + 2]
            if logm[i, j] <= nb.min():
                seeds.append((logm[i, j], complex(xs[j], ys[i])))
    seeds = [z for _, z in sorted(seeds, key=lambda s: s[0])]
    f = lambda e: qes_determinant(p, e)  # noqa: E731

    def inside(z):
        return re_min <= z.real <= re_max and im_min <= z.imag <= im_max

    roots: list[complex] = []
    for s in seeds:
        z = _newton(f, s)
        if z is not None and inside(z):
            if not any(abs(z - r) <= dedup_tol * max(1.0, abs(z)) for r in roots):
                roots.append(z)

    # Deflated passes: new roots are accepted even when close to old ones,
    # since the deflated function has no zero at a simple root already held.
    cell = max(re_max - re_min, im_max - im_min) / max(grid - 1, 1)
    starts = seeds + [complex(x, y) for x, y in zip(X.ravel()[::7], Y.ravel()[::7])]
    for s in starts[: 8 * expected]:
        if len(roots) >= expected:
            break
        z = _newton(f, s + 0.37 * cell * (1 + 0.6j), deflate=tuple(roots))
        if z is not None and inside(z):
            roots.append(z)
    if len(roots) != expected:
        warnings.warn(
            f"found {len(roots)} QES energies, expected {expected}; widen the search box",
            CountMismatch,
            stacklevel=2,
        )
    out = np.array(roots, dtype=np.complex128)
    return out[np.lexsort((out.imag, out.real))]
