"""2x2 matrix differential operators with polynomial coefficients.

An operator is a bag of terms ``c * x**p * (d/dx)**q`` placed at matrix entry
``(row, col)``. Rows and columns are 1-based, as in the usual matrix notation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .numkernel import ComplexPoly, PolyVec2


@dataclass(frozen=True)
class OpTerm:
    row: int
    col: int
    p: int
    q: int
    coeff: complex

    def __post_init__(self):
        if self.row not in (1, 2) or self.col not in (1, 2):
            raise ValueError(f"row/col must be 1 or 2, got ({self.row}, {self.col})")
        if self.p < 0 or self.q < 0:
            raise ValueError("monomial power and derivative order must be >= 0")
        if not np.isfinite(complex(self.coeff)):
            raise ValueError("term coefficient must be finite")

    @property
    def key(self):
        return (self.row, self.col, self.q, self.p)


@dataclass(frozen=True)
class DegreeProfile:
    """Top degrees ``(d1, d2)`` of the two components of a candidate space."""

    d1: int
    d2: int

    def __post_init__(self):
        if self.d1 < 0 or self.d2 < 0:
            raise ValueError(f"degrees must be non-negative, got ({self.d1}, {self.d2})")

    def __getitem__(self, comp: int) -> int:
        """Degree of component ``comp`` (1-based)."""
        return (self.d1, self.d2)[comp - 1]

    @property
    def delta(self) -> int:
        """The offset with ``d2 = d1 - delta + 1``."""
        return self.d1 - self.d2 + 1


class MatrixDiffOp:
    """Canonically ordered, merged list of :class:`OpTerm`.

    Terms sharing ``(row, col, q, p)`` are summed; exact zeros are dropped.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Iterable[OpTerm] = ()):
        merged: dict[tuple, complex] = {}
        for t in terms:
            merged[t.key] = merged.get(t.key, 0j) + complex(t.coeff)
        self._terms = tuple(
            OpTerm(row, col, p, q, c)
            for (row, col, q, p), c in sorted(merged.items())
            if c != 0
        )

    @classmethod
    def from_entries(cls, entries: Mapping[tuple[int, int], Iterable[tuple[int, int, complex]]]):
        """Build from ``{(row, col): [(p, q, coeff), ...]}``."""
        return cls(
            OpTerm(r, c, p, q, coeff)
            for (r, c), items in entries.items()
            for p, q, coeff in items
        )

    @classmethod
    def identity(cls, c: complex = 1.0) -> "MatrixDiffOp":
        return cls([OpTerm(1, 1, 0, 0, c), OpTerm(2, 2, 0, 0, c)])

    @property
    def terms(self) -> tuple[OpTerm, ...]:
        return self._terms

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def __add__(self, other: "MatrixDiffOp") -> "MatrixDiffOp":
        return MatrixDiffOp(self._terms + other._terms)

    def scaled(self, c: complex) -> "MatrixDiffOp":
        return MatrixDiffOp(OpTerm(t.row, t.col, t.p, t.q, t.coeff * c) for t in self._terms)

    def shifted(self, c: complex) -> "MatrixDiffOp":
        """``self + c * identity``."""
        return self + MatrixDiffOp.identity(c)

    def __eq__(self, other):
        if not isinstance(other, MatrixDiffOp):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(self._terms)

    def __repr__(self):
        return f"MatrixDiffOp({len(self._terms)} terms)"

    def coeff_scale(self) -> float:
        return max((abs(t.coeff) for t in self._terms), default=0.0)

    # --- JSON ---------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "terms": [
                {"row": t.row, "col": t.col, "p": t.p, "q": t.q,
                 "re": complex(t.coeff).real, "im": complex(t.coeff).imag}
                for t in self._terms
            ]
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "MatrixDiffOp":
        try:
            return cls(
                OpTerm(int(t["row"]), int(t["col"]), int(t["p"]), int(t["q"]),
                       complex(float(t.get("re", 0.0)), float(t.get("im", 0.0))))
                for t in doc["terms"]
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed operator document: {exc}") from exc

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text: str) -> "MatrixDiffOp":
        return cls.from_dict(json.loads(text))


def apply(op: MatrixDiffOp, v: PolyVec2) -> PolyVec2:
    """Exact action of ``op`` on a polynomial 2-vector."""
    out = [ComplexPoly(), ComplexPoly()]
    cache: dict[tuple[int, int], ComplexPoly] = {}
    for t in op:
        key = (t.col, t.q)
        if key not in cache:
            cache[key] = v[t.col - 1].deriv(t.q)
        out[t.row - 1] = out[t.row - 1] + cache[key].shift(t.p) * t.coeff
    return PolyVec2(out[0], out[1])


def grade_of(term: OpTerm, profile: DegreeProfile) -> int:
    """Net degree change ``p - q + d(col) - d(row)`` of a term."""
    return term.p - term.q + profile[term.col] - profile[term.row]


def grade_decompose(op: MatrixDiffOp, profile: DegreeProfile) -> dict[int, MatrixDiffOp]:
    """Split ``op`` into pieces of fixed grade; the pieces sum back to ``op``."""
    buckets: dict[int, list[OpTerm]] = {}
    for t in op:
        buckets.setdefault(grade_of(t, profile), []).append(t)
    return {g: MatrixDiffOp(ts) for g, ts in sorted(buckets.items())}


def reassemble(pieces: Mapping[int, MatrixDiffOp]) -> MatrixDiffOp:
    return MatrixDiffOp(t for piece in pieces.values() for t in piece)


def poly_terms(row: int, col: int, poly_coeffs, q: int) -> list[OpTerm]:
    """Terms for ``(sum_k a_k x**k) * (d/dx)**q`` at one matrix entry."""
    return [OpTerm(row, col, k, q, a) for k, a in enumerate(poly_coeffs) if a != 0]
