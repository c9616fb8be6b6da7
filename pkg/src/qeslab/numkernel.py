"""Complex polynomial and small dense matrix arithmetic.

Everything here works in double precision complex. Polynomials are immutable
value objects; matrices are plain ``numpy`` arrays of dtype ``complex128``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg

from .errors import DimensionError, NonConvergence

TRIM_RTOL = 1e-13
ZERO_DEGREE = -math.inf
MAX_EIG_DIM = 64


def _as_coeff_array(coeffs) -> np.ndarray:
    arr = np.array(coeffs, dtype=np.complex128).ravel()
    if not np.all(np.isfinite(arr)):
        raise ValueError("polynomial coefficients must be finite")
    return arr


def _trim(arr: np.ndarray) -> np.ndarray:
    if arr.size == 0:
        return arr
    scale = np.max(np.abs(arr))
    if scale == 0.0:
        return arr[:0]
    cutoff = TRIM_RTOL * scale
    last = arr.size
    while last > 0 and abs(arr[last - 1]) < cutoff:
        last -= 1
    return arr[:last]


class ComplexPoly:
    """Dense univariate polynomial, ``coeffs[k]`` multiplies ``x**k``.

    Leading coefficients smaller than ``1e-13 * max|coeff|`` are trimmed on
    construction, so ``degree`` is stable under floating-point cancellation.
    The zero polynomial has an empty coefficient array and degree ``-inf``.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Sequence[complex] | np.ndarray = ()):
        c = _trim(_as_coeff_array(coeffs))
        c.setflags(write=False)
        self._c = c

    @classmethod
    def monomial(cls, k: int, coeff: complex = 1.0) -> "ComplexPoly":
        if k < 0:
            return cls()
        c = np.zeros(k + 1, dtype=np.complex128)
        c[k] = coeff
        return cls(c)

    @classmethod
    def from_roots(cls, roots, lead: complex = 1.0) -> "ComplexPoly":
        p = cls([lead])
        for r in roots:
            p = p * cls([-r, 1.0])
        return p

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def degree(self) -> int | float:
        return self._c.size - 1 if self._c.size else ZERO_DEGREE

    def is_zero(self) -> bool:
        return self._c.size == 0

    def coeff(self, k: int) -> complex:
        if 0 <= k < self._c.size:
            return complex(self._c[k])
        return 0j

    def padded(self, length: int) -> np.ndarray:
        """Coefficient vector zero-padded (never truncated) to ``length``."""
        if self._c.size > length:
            raise ValueError(f"degree {self.degree} does not fit in {length} slots")
        out = np.zeros(length, dtype=np.complex128)
        out[: self._c.size] = self._c
        return out

    def __add__(self, other):
        if not isinstance(other, ComplexPoly):
            other = ComplexPoly([other])
        n = max(self._c.size, other._c.size)
        return ComplexPoly(self.padded(n) + other.padded(n))

    __radd__ = __add__

    def __neg__(self):
        return ComplexPoly(-self._c)

    def __sub__(self, other):
        if not isinstance(other, ComplexPoly):
            other = ComplexPoly([other])
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, ComplexPoly):
            if self.is_zero() or other.is_zero():
                return ComplexPoly()
            return ComplexPoly(np.convolve(self._c, other._c))
        return ComplexPoly(self._c * complex(other))

    __rmul__ = __mul__

    def deriv(self, order: int = 1) -> "ComplexPoly":
        c = self._c
        for _ in range(order):
            if c.size <= 1:
                return ComplexPoly()
            c = c[1:] * np.arange(1, c.size)
        return ComplexPoly(c)

    def shift(self, k: int) -> "ComplexPoly":
        """Multiply by ``x**k``."""
        if self.is_zero():
            return self
        return ComplexPoly(np.concatenate([np.zeros(k, dtype=np.complex128), self._c]))

    def __call__(self, x):
        if self.is_zero():
            return np.zeros_like(np.asarray(x, dtype=np.complex128))
        return np.polyval(self._c[::-1], x)

    def __eq__(self, other):
        if not isinstance(other, ComplexPoly):
            return NotImplemented
        return self._c.shape == other._c.shape and bool(np.all(self._c == other._c))

    def __hash__(self):
        return hash(self._c.tobytes())

    def allclose(self, other: "ComplexPoly", atol: float = 1e-12) -> bool:
        n = max(self._c.size, other._c.size)
        return bool(np.allclose(self.padded(n), other.padded(n), rtol=0.0, atol=atol))

    def __repr__(self):
        return f"ComplexPoly({self._c.tolist()!r})"


@dataclass(frozen=True)
class PolyVec2:
    """Two-component polynomial vector ``(top, bot)``."""

    top: ComplexPoly
    bot: ComplexPoly

    @classmethod
    def zero(cls) -> "PolyVec2":
        return cls(ComplexPoly(), ComplexPoly())

    def __getitem__(self, i: int) -> ComplexPoly:
        return (self.top, self.bot)[i]

    def __add__(self, other: "PolyVec2") -> "PolyVec2":
        return PolyVec2(self.top + other.top, self.bot + other.bot)

    def __sub__(self, other: "PolyVec2") -> "PolyVec2":
        return PolyVec2(self.top - other.top, self.bot - other.bot)

    def __mul__(self, c: complex) -> "PolyVec2":
        return PolyVec2(self.top * c, self.bot * c)

    __rmul__ = __mul__

    def degrees(self):
        return self.top.degree, self.bot.degree


# --- roots -----------------------------------------------------------------


def _initial_guesses(c: np.ndarray) -> np.ndarray:
    # Fujiwara bound on the root moduli; points spread on a rotated circle.
    n = c.size - 1
    lead = c[-1]
    bound = 2.0 * max(
        abs(c[n - k] / lead) ** (1.0 / k) if k < n else abs(c[0] / (2 * lead)) ** (1.0 / n)
        for k in range(1, n + 1)
    )
    bound = bound if bound > 0 else 1.0
    angles = 2 * np.pi * np.arange(n) / n + 0.4
    return 0.5 * bound * np.exp(1j * angles)


def poly_roots(p: ComplexPoly, max_iter: int = 500) -> np.ndarray:
    """All ``degree(p)`` roots of ``p`` by simultaneous Aberth-Ehrlich iteration.

    A root is frozen once ``|p(z)|`` is within a small multiple of the
    rounding-error bound of Horner evaluation at ``z``.

    Raises
    ------
    NonConvergence
        If some root has not met the backward-error test after ``max_iter``
        sweeps.
    """
    if p.degree < 1:
        raise ValueError("poly_roots needs degree >= 1")
    c = p.coeffs
    n = c.size - 1
    # strip zero roots exactly
    nzero = int(np.argmax(np.abs(c) > 0))
    c = c[nzero:]
    n_rest = c.size - 1
    if n_rest == 0:
        return np.zeros(n, dtype=np.complex128)
    if n_rest == 1:
        return np.concatenate([[-c[0] / c[1]], np.zeros(nzero)])

    rev = c[::-1]
    drev = (c[1:] * np.arange(1, c.size))[::-1]
    absrev = np.abs(rev)
    eps = np.finfo(float).eps

    z = _initial_guesses(c)
    done = np.zeros(n_rest, dtype=bool)
    for _ in range(max_iter):
        pz = np.polyval(rev, z)
        bound = 8 * n_rest * eps * np.polyval(absrev, np.abs(z))
        done |= np.abs(pz) <= bound
        if done.all():
            break
        active = ~done
        dz = np.polyval(drev, z[active])
        newton = pz[active] / dz
        diff = z[active, None] - z[None, :]
        idx = np.nonzero(active)[0]
        diff[np.arange(idx.size), idx] = np.inf
        s = np.sum(1.0 / diff, axis=1)
        z[active] = z[active] - newton / (1.0 - newton * s)
    else:
        raise NonConvergence(f"Aberth-Ehrlich did not converge in {max_iter} sweeps")
    return np.concatenate([z, np.zeros(nzero, dtype=np.complex128)])


# --- matrices --------------------------------------------------------------


def as_cmatrix(m) -> np.ndarray:
    a = np.array(m, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def eig(m) -> np.ndarray:
    """Eigenvalues of a square complex matrix (LAPACK Hessenberg + shifted QR)."""
    a = as_cmatrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"eig needs a square matrix, got {a.shape}")
    if a.shape[0] > MAX_EIG_DIM:
        raise DimensionError(f"dimension {a.shape[0]} exceeds desk-scale cap {MAX_EIG_DIM}")
    if a.shape[0] == 0:
        return np.zeros(0, dtype=np.complex128)
    try:
        return np.linalg.eigvals(a).astype(np.complex128)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(str(exc)) from exc


def charpoly(m) -> ComplexPoly:
    """Characteristic polynomial ``det(x I - m)`` via Hessenberg form.

    Uses La Budde's recurrence on the upper Hessenberg reduction, which stays
    stable at desk-scale dimensions where Faddeev-LeVerrier does not.
    """
    a = as_cmatrix(m)
    n = a.shape[0]
    if a.shape[1] != n:
        raise DimensionError(f"charpoly needs a square matrix, got {a.shape}")
    h = scipy.linalg.hessenberg(a) if n > 2 else a
    x = np.array([0.0, 1.0], dtype=np.complex128)
    polys = [np.array([1.0], dtype=np.complex128)]
    for i in range(n):
        p = np.convolve(x - np.array([h[i, i], 0.0]), polys[i])
        prod = 1.0 + 0j
        for m_ in range(1, i + 1):
            prod *= h[i - m_ + 1, i - m_]
            term = h[i - m_, i] * prod * polys[i - m_]
            p[: term.size] -= term
        polys.append(p)
    return ComplexPoly(polys[n])


def eig_via_charpoly(m) -> np.ndarray:
    """Eigenvalues as roots of :func:`charpoly`; the independent route to :func:`eig`."""
    a = as_cmatrix(m)
    if a.shape[0] == 0:
        return np.zeros(0, dtype=np.complex128)
    return poly_roots(charpoly(a))


class Kernel(NamedTuple):
    rank: int
    vector: np.ndarray | None


def _phase_normalize(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k])


def kernel_vector(m, tol: float = 1e-9) -> Kernel | None:
    """Null vector of a 2x2 matrix, or ``None`` when it is numerically regular.

    Returns ``Kernel(0, None)`` when ``||m|| <= tol`` (every direction is null),
    ``Kernel(1, v)`` with ``v`` a unit vector when ``|det m| <= tol ||m||^2``.
    The ray is phase-normalized so its largest component is real positive.
    """
    a = as_cmatrix(m)
    if a.shape != (2, 2):
        raise DimensionError("kernel_vector is defined for 2x2 matrices")
    norm = np.linalg.norm(a)
    if norm <= tol:
        return Kernel(0, None)
    if abs(np.linalg.det(a)) > tol * norm**2:
        return None
    return Kernel(1, least_singular_vector(a))


def least_singular_vector(a: np.ndarray) -> np.ndarray:
    _, _, vh = np.linalg.svd(a)
    return _phase_normalize(vh[-1].conj())


# --- multiset comparison ---------------------------------------------------


def match_multisets(a, b) -> tuple[np.ndarray, np.ndarray]:
    """Greedy minimal-distance pairing of two equal-size complex multisets.

    Returns the reordered ``b`` aligned with ``a`` and the pairwise distances.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = list(np.asarray(b, dtype=np.complex128))
    if a.size != len(b):
        raise DimensionError(f"multiset sizes differ: {a.size} vs {len(b)}")
    pairs = sorted(
        ((abs(x - y), i, j) for i, x in enumerate(a) for j, y in enumerate(b)),
        key=lambda t: t[0],
    )
    out = np.empty(a.size, dtype=np.complex128)
    used_a, used_b = set(), set()
    for _, i, j in pairs:
        if i in used_a or j in used_b:
            continue
        out[i] = b[j]
        used_a.add(i)
        used_b.add(j)
    return out, np.abs(a - out)


def multiset_distance(a, b) -> float:
    """Largest pairwise distance after greedy matching (0 for empty sets)."""
    if len(a) == 0 and len(b) == 0:
        return 0.0
    return float(np.max(match_multisets(a, b)[1]))
