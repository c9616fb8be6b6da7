"""Certification of finite-dimensional polynomial invariant subspaces.

The fast path reads three constant 2x2 matrices off the graded operator:

* ``M1``  -- top-degree action of the grade +1 piece,
* ``M1t`` -- action of the grade +1 piece one degree below the top,
* ``M0``  -- top-degree action of the grade 0 piece,

and tests ``M1 v = 0``, ``M0 v = lam v`` and ``M1t^T (-v2, v1) = 0`` for the
top-coefficient ray ``v``. :func:`closure_check` is the brute-force arbiter:
apply the operator to a basis and measure what falls outside its span.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .diffop import DegreeProfile, MatrixDiffOp, apply, grade_decompose
from .errors import SingularBasis
from .numkernel import ComplexPoly, PolyVec2, kernel_vector, least_singular_vector

DEFAULT_TOL = 1e-9


class Verdict(str, enum.Enum):
    CERTIFIED_RANK1 = "CERTIFIED_RANK1"
    CERTIFIED_RANK0 = "CERTIFIED_RANK0"
    FAILED = "FAILED"

    @property
    def certified(self) -> bool:
        return self is not Verdict.FAILED


def _unit(comp: int, degree: int) -> PolyVec2:
    mono = ComplexPoly.monomial(degree)
    return PolyVec2(mono, ComplexPoly()) if comp == 1 else PolyVec2(ComplexPoly(), mono)


def extract_matrices(pieces: dict[int, MatrixDiffOp], profile: DegreeProfile):
    """Return ``(M1, M1t, M0)`` for a grade decomposition built against ``profile``."""
    h1 = pieces.get(1, MatrixDiffOp())
    h0 = pieces.get(0, MatrixDiffOp())
    M1 = np.zeros((2, 2), dtype=np.complex128)
    M1t = np.zeros((2, 2), dtype=np.complex128)
    M0 = np.zeros((2, 2), dtype=np.complex128)
    for j in (1, 2):
        dj = profile[j]
        top = apply(h1, _unit(j, dj))
        zero = apply(h0, _unit(j, dj))
        below = apply(h1, _unit(j, dj - 1)) if dj > 0 else None
        for i in (1, 2):
            di = profile[i]
            M1[i - 1, j - 1] = top[i - 1].coeff(di + 1)
            M0[i - 1, j - 1] = zero[i - 1].coeff(di)
            if below is not None:
                M1t[i - 1, j - 1] = below[i - 1].coeff(di)
    return M1, M1t, M0


def _cvec(v):
    return None if v is None else [[complex(x).real, complex(x).imag] for x in np.ravel(v)]


def _cmat(m):
    return [[[complex(x).real, complex(x).imag] for x in row] for row in np.asarray(m)]


@dataclass(frozen=True)
class QESCertificate:
    M1: np.ndarray
    M1tilde: np.ndarray
    M0: np.ndarray
    rank_M1: int
    kernel: np.ndarray | None
    Lambda: complex | None
    residual_cond_i: float
    residual_cond_ii_M0: float
    residual_cond_ii_transpose: float
    verdict: Verdict
    residual_higher_grade: float = 0.0
    scale: float = field(default=1.0, repr=False)

    @property
    def certified(self) -> bool:
        return self.verdict.certified

    @property
    def kernel_ratio(self) -> complex | None:
        """``alpha0 / beta0`` of the locked top vector (``None`` if absent or infinite)."""
        if self.kernel is None or self.kernel[1] == 0:
            return None
        return complex(self.kernel[0] / self.kernel[1])

    def to_dict(self) -> dict:
        lam = None if self.Lambda is None else [self.Lambda.real, self.Lambda.imag]
        return {
            "verdict": self.verdict.value,
            "rank_M1": self.rank_M1,
            "M1": _cmat(self.M1),
            "M1tilde": _cmat(self.M1tilde),
            "M0": _cmat(self.M0),
            "kernel": _cvec(self.kernel),
            "Lambda": lam,
            "residual_cond_i": self.residual_cond_i,
            "residual_cond_ii_M0": self.residual_cond_ii_M0,
            "residual_cond_ii_transpose": self.residual_cond_ii_transpose,
            "residual_higher_grade": self.residual_higher_grade,
        }


def _monomial_basis(profile: DegreeProfile) -> list[PolyVec2]:
    return [_unit(1, k) for k in range(profile.d1 + 1)] + [
        _unit(2, k) for k in range(profile.d2 + 1)
    ]


def _higher_grade_residual(pieces, profile, scale) -> float:
    # Grade >= 2 pieces fall outside the H1 + H0 + ... form; they are admitted
    # only if they annihilate every monomial of the profile space.
    worst = 0.0
    for g, piece in pieces.items():
        if g < 2:
            continue
        for v in _monomial_basis(profile):
            w = apply(piece, v)
            norm = np.sqrt(sum(np.sum(np.abs(c.coeffs) ** 2) for c in (w.top, w.bot)))
            worst = max(worst, norm / scale)
    return worst


def certify(op: MatrixDiffOp, profile: DegreeProfile, tol: float = DEFAULT_TOL) -> QESCertificate:
    """Test conditions (i) and (ii') for the candidate space with top degrees ``profile``.

    All residuals are divided by the common scale
    ``max(||M1||, ||M1t||, ||M0||)`` (Frobenius), so they do not change when the
    operator is multiplied by a constant.
    """
    pieces = grade_decompose(op, profile)
    M1, M1t, M0 = extract_matrices(pieces, profile)
    scale = max(np.linalg.norm(M1), np.linalg.norm(M1t), np.linalg.norm(M0))
    if scale == 0.0:
        scale = 1.0
    r_high = _higher_grade_residual(pieces, profile, scale)
    high_ok = r_high <= tol

    ker = kernel_vector(M1 / scale, tol)
    if ker is not None and ker.rank == 0:
        verdict = Verdict.CERTIFIED_RANK0 if high_ok else Verdict.FAILED
        return QESCertificate(M1, M1t, M0, 0, None, None, 0.0, 0.0, 0.0, verdict,
                              r_high, scale)

    v = ker.vector if ker is not None else least_singular_vector(M1)
    r_i = float(np.linalg.norm(M1 @ v) / scale)
    lam = complex(np.vdot(v, M0 @ v))
    r_m0 = float(np.linalg.norm(M0 @ v - lam * v) / scale)
    w = np.array([-v[1], v[0]])
    r_t = float(np.linalg.norm(M1t.T @ w) / scale)
    rank = 1 if ker is not None else 2
    ok = ker is not None and high_ok and max(r_i, r_m0, r_t) <= tol
    return QESCertificate(
        M1, M1t, M0, rank,
        v if ker is not None else None,
        lam if ker is not None else None,
        r_i, r_m0, r_t,
        Verdict.CERTIFIED_RANK1 if ok else Verdict.FAILED,
        r_high, scale,
    )


def locked_basis(profile: DegreeProfile, ray) -> list[PolyVec2]:
    """Top vector ``(a x**d1, b x**d2)`` followed by all lower monomials."""
    a, b = complex(ray[0]), complex(ray[1])
    top = PolyVec2(ComplexPoly.monomial(profile.d1, a), ComplexPoly.monomial(profile.d2, b))
    return (
        [top]
        + [_unit(1, k) for k in range(profile.d1)]
        + [_unit(2, k) for k in range(profile.d2)]
    )


def candidate_basis(cert: QESCertificate, profile: DegreeProfile) -> list[PolyVec2]:
    """Basis the certificate proposes as invariant.

    For a failed certificate the best-effort ray (least singular vector of
    ``M1``) is used, so the brute-force check can confirm the failure.
    """
    if cert.rank_M1 == 0:
        return _monomial_basis(profile)
    ray = cert.kernel if cert.kernel is not None else least_singular_vector(cert.M1)
    return locked_basis(profile, ray)


def _layout(vectors) -> tuple[int, int]:
    l1 = max((v.top.coeffs.size for v in vectors), default=0)
    l2 = max((v.bot.coeffs.size for v in vectors), default=0)
    return max(l1, 1), max(l2, 1)


def _stack(vectors, lengths) -> np.ndarray:
    l1, l2 = lengths
    return np.column_stack(
        [np.concatenate([v.top.padded(l1), v.bot.padded(l2)]) for v in vectors]
    )


def project(op: MatrixDiffOp, basis: list[PolyVec2], tol: float = 1e-12):
    """Coordinates of ``op`` applied to each basis vector, plus the closure residual.

    Returns ``(X, residual)`` where column ``j`` of ``X`` holds the
    least-squares coordinates of ``op(basis[j])`` and ``residual`` is the
    largest out-of-span remainder divided by the largest image norm.
    """
    if not basis:
        raise SingularBasis("empty basis")
    images = [apply(op, v) for v in basis]
    lengths = _layout(list(basis) + images)
    B = _stack(basis, lengths)
    Y = _stack(images, lengths)
    sv = np.linalg.svd(B, compute_uv=False)
    if sv[-1] <= tol * sv[0] or B.shape[0] < B.shape[1]:
        raise SingularBasis(f"basis is rank deficient (singular values {sv[0]:.3g}..{sv[-1]:.3g})")
    X, *_ = np.linalg.lstsq(B, Y, rcond=None)
    R = Y - B @ X
    ynorm = np.max(np.linalg.norm(Y, axis=0))
    if ynorm == 0.0:
        return X, 0.0
    return X, float(np.max(np.linalg.norm(R, axis=0)) / ynorm)


def closure_check(op: MatrixDiffOp, basis: list[PolyVec2], tol: float = 1e-12) -> float:
    """Relative out-of-span remainder of ``op`` on ``span(basis)``.

    ``tol`` is the relative singular-value cutoff below which the basis is
    declared singular.

    Raises
    ------
    SingularBasis
        If the basis coefficient matrix is numerically rank deficient.
    """
    return project(op, basis, tol)[1]
