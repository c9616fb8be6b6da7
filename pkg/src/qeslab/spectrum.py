"""Restriction of a certified operator to its invariant space, and its eigenvalues."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diffop import DegreeProfile, MatrixDiffOp
from .errors import DimensionError, NotCertified
from .numkernel import MAX_EIG_DIM, PolyVec2, eig
from .qescert import QESCertificate, locked_basis, project, _monomial_basis


@dataclass(frozen=True)
class InvariantBasis:
    profile: DegreeProfile
    vectors: tuple[PolyVec2, ...]
    locked_ratio: tuple[complex, complex] | None = None

    @property
    def dimension(self) -> int:
        return len(self.vectors)

    def permuted(self, order) -> "InvariantBasis":
        return InvariantBasis(self.profile, tuple(self.vectors[i] for i in order), self.locked_ratio)


def count_real(eigenvalues, realness_tol: float) -> int:
    ev = np.asarray(eigenvalues)
    return int(np.sum(np.abs(ev.imag) <= realness_tol * (1.0 + np.abs(ev.real))))


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray
    closure_residual: float
    real_count: int
    realness_tol: float

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [[float(e.real), float(e.imag)] for e in self.eigenvalues],
            "real_count": self.real_count,
            "closure_residual": self.closure_residual,
        }

    @property
    def min_gap(self) -> float:
        ev = self.eigenvalues
        if ev.size < 2:
            return float("inf")
        d = np.abs(ev[:, None] - ev[None, :])
        d[np.diag_indices_from(d)] = np.inf
        return float(d.min())


def build_basis(cert: QESCertificate, profile: DegreeProfile) -> InvariantBasis:
    """Invariant-space basis implied by a certificate.

    Rank 1 locks the ratio of the two top coefficients (dimension
    ``d1 + d2 + 1``); rank 0 keeps every monomial (dimension ``d1 + d2 + 2``).
    """
    if not cert.certified:
        raise NotCertified(f"certificate verdict is {cert.verdict.value}")
    if cert.rank_M1 == 0:
        vectors = _monomial_basis(profile)
        ratio = None
    else:
        vectors = locked_basis(profile, cert.kernel)
        ratio = (complex(cert.kernel[0]), complex(cert.kernel[1]))
    if len(vectors) > MAX_EIG_DIM:
        raise DimensionError(f"invariant space dimension {len(vectors)} exceeds {MAX_EIG_DIM}")
    return InvariantBasis(profile, tuple(vectors), ratio)


def matrix_rep(op: MatrixDiffOp, basis: InvariantBasis):
    """Matrix of ``op`` in ``basis`` (columns are image coordinates) and the closure residual."""
    return project(op, list(basis.vectors))


def _sorted(ev: np.ndarray) -> np.ndarray:
    return ev[np.lexsort((np.round(ev.imag, 12), np.round(ev.real, 12)))]


def algebraic_spectrum(
    op: MatrixDiffOp,
    cert: QESCertificate,
    profile: DegreeProfile,
    realness_tol: float = 1e-8,
) -> SpectrumResult:
    """Eigenvalues of ``op`` restricted to the certified invariant space.

    Eigenvalues are raw: any additive constant built into ``op`` is included.
    An eigenvalue counts as real when ``|Im| <= realness_tol * (1 + |Re|)``.
    """
    basis = build_basis(cert, profile)
    mat, residual = matrix_rep(op, basis)
    ev = _sorted(eig(mat))
    return SpectrumResult(ev, residual, count_real(ev, realness_tol), realness_tol)
