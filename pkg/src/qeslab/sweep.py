"""Real-eigenvalue counts over the (M, rho) plane and critical-curve bisection.

Only the trigonometric family is scanned: each grid point is completed into a
QES parameter set by :func:`trig_qes_params`, certified, and diagonalized.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import QESError
from .models import WType, trig_operator, trig_qes_params
from .qescert import certify
from .spectrum import algebraic_spectrum

CSV_HEADER = ("M", "rho", "real_count", "min_gap", "closure_residual")
BISECT_TOL = 1e-6


class ScanRow(NamedTuple):
    M: float
    rho: float
    real_count: int
    min_gap: float
    closure_residual: float


@dataclass(frozen=True)
class ScanResult:
    n: int
    wtype: WType
    rows: tuple[ScanRow, ...]

    def counts(self) -> set[int]:
        return {r.real_count for r in self.rows}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([repr(float(r.M)), repr(float(r.rho)), r.real_count,
                        repr(float(r.min_gap)), repr(float(r.closure_residual))])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "wtype": self.wtype.value,
            "grid": [r._asdict() for r in self.rows],
        }


def point(M: float, rho: float, n: int, wtype=WType.I, c: complex = 1.0,
          tol: float = 1e-9, realness_tol: float = 1e-8) -> ScanRow:
    """Evaluate one grid point; solver failures give ``real_count = -1``."""
    try:
        p = trig_qes_params(n, M, rho, c, WType(wtype))
        op, prof = trig_operator(p)
        cert = certify(op, prof, tol)
        res = algebraic_spectrum(op, cert, prof, realness_tol)
    except (QESError, ArithmeticError, ValueError, np.linalg.LinAlgError):
        return ScanRow(M, rho, -1, math.nan, math.nan)
    return ScanRow(M, rho, res.real_count, res.min_gap, res.closure_residual)


def _point_star(args):
    return point(*args)


def parallel_map(fn, items, workers: int = 1) -> list:
    """Order-preserving map, run in a process pool when ``workers > 1``."""
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def scan(
    n: int,
    wtype=WType.I,
    m_range: tuple[float, float] = (0.0, 3.0),
    m_steps: int = 31,
    rho_range: tuple[float, float] = (0.02, 2.0),
    rho_steps: int = 100,
    c: complex = 1.0,
    tol: float = 1e-9,
    realness_tol: float = 1e-8,
    workers: int = 1,
) -> ScanResult:
    """Real-eigenvalue count on an ``m_steps x rho_steps`` grid, M-major order."""
    Ms = np.linspace(*m_range, m_steps)
    rhos = np.linspace(*rho_range, rho_steps)
    wtype = WType(wtype)
    jobs = [(float(M), float(r), n, wtype, c, tol, realness_tol) for M in Ms for r in rhos]
    return ScanResult(n, wtype, tuple(parallel_map(_point_star, jobs, workers)))


class CriticalPoint(NamedTuple):
    M: float
    rho_c: float
    branch: int


@dataclass(frozen=True)
class CriticalCurve:
    n: int
    wtype: WType
    points: tuple[CriticalPoint, ...]

    def branches_at(self, M: float) -> list[float]:
        return [p.rho_c for p in self.points if p.M == M]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("M", "rho_c", "branch"))
        for p in self.points:
            w.writerow([repr(float(p.M)), repr(float(p.rho_c)), p.branch])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "wtype": self.wtype.value,
            # JSON has no infinity; a missing branch is written as null
            "points": [
                {"M": p.M, "rho_c": None if math.isinf(p.rho_c) else p.rho_c, "branch": p.branch}
                for p in self.points
            ],
        }


def bisect_transition(M, lo, hi, n, wtype=WType.I, c=1.0, tol=1e-9, realness_tol=1e-8,
                      bisect_tol: float = BISECT_TOL) -> float:
    """Shrink ``[lo, hi]`` around the single count change between its ends."""
    count = lambda r: point(M, r, n, wtype, c, tol, realness_tol).real_count  # noqa: E731
    c_lo = count(lo)
    while hi - lo > bisect_tol:
        mid = 0.5 * (lo + hi)
        if count(mid) == c_lo:
            lo = mid
        else:
            hi = mid
    return float(0.5 * (lo + hi))


def _critical_at(args) -> list[float]:
    M, n, wtype, c, rho_min, rho_max, rho_steps, tol, realness_tol, bisect_tol = args
    rhos = [float(r) for r in np.linspace(rho_min, rho_max, rho_steps)]
    counts = [point(M, r, n, wtype, c, tol, realness_tol).real_count for r in rhos]
    found = []
    for i in range(len(rhos) - 1):
        if counts[i] >= 0 and counts[i + 1] >= 0 and counts[i] != counts[i + 1]:
            found.append(bisect_transition(M, rhos[i], rhos[i + 1], n, wtype, c, tol,
                                           realness_tol, bisect_tol))
    found.sort()
    # one branch per eigenvalue pair; branches that never cross are infinite
    return found + [math.inf] * max(0, n - len(found))


def critical(
    n: int,
    Ms,
    wtype=WType.I,
    rho_range: tuple[float, float] = (0.01, 2.0),
    rho_steps: int = 200,
    c: complex = 1.0,
    tol: float = 1e-9,
    realness_tol: float = 1e-8,
    bisect_tol: float = BISECT_TOL,
    workers: int = 1,
) -> CriticalCurve:
    """Critical ``rho_c(M)`` values where the real count changes.

    For each ``M`` the coarse ``rho`` grid is scanned and every cell with a
    count change is bisected to ``bisect_tol``. Branch indices follow
    ``rho_c``; absent branches carry ``+inf``.
    """
    wtype = WType(wtype)
    Ms = [float(M) for M in np.atleast_1d(Ms)]
    jobs = [(M, n, wtype, c, *rho_range, rho_steps, tol, realness_tol, bisect_tol) for M in Ms]
    per_M = parallel_map(_critical_at, jobs, workers)
    pts = tuple(
        CriticalPoint(M, r, k) for M, rs in zip(Ms, per_M) for k, r in enumerate(rs)
    )
    return CriticalCurve(n, wtype, pts)
