"""The four gauged model families, their QES parameter solvers, and PT checks.

Gauged operators are written down directly in the algebraizing variable
(``x`` for the sextic and quartic models, ``z`` for the trigonometric and
hyperbolic ones). The original x-space potentials are kept only for
:func:`pt_check`.

Conventions
-----------
trigonometric
    ``H = -d^2/dx^2 + (rho cos2x - i M)^2 + A`` (and ``M~, A~`` in the second
    component), gauge ``exp(i rho/2 cos 2x)`` times ``z^eps (1-z)^phi`` with
    ``z = (cos 2x + 1)/2``.
hyperbolic
    ``H = -d^2/dx^2 - (rho cosh2x - i M)^2``, off-diagonals
    ``C (cosh2x - 1) + C~`` and ``D (cosh2x - 1) + D~``; ``z = cosh 2x - 1``.
quartic
    the doubly gauged ``S^-1 H~ S`` with invariant space ``(P_{n-2}, P_n)``.
sextic
    ``-4x d^2 - 2d + 8 p2 diag(J+(m-2), J+(m)) - 8 m p2 kappa0 sigma_1``.
"""
from __future__ import annotations

import dataclasses
import enum
import json
from dataclasses import dataclass
from math import comb
from typing import Any, Mapping

import numpy as np

from .diffop import DegreeProfile, MatrixDiffOp, OpTerm, poly_terms
from .errors import DegenerateKernel, UnsupportedCombination

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
import tomli_w


class WType(str, enum.Enum):
    I = "i"
    II = "ii"
    III = "iii"
    IV = "iv"


class OffDiag(str, enum.Enum):
    COS2X_PLUS_D = "cos2x_plus_d"
    COSX = "cosx"
    SINX = "sinx"
    SINXCOSX = "sinxcosx"


@dataclass(frozen=True)
class SexticParams:
    """Sextic matrix oscillator with ``eps = 0``, ``p1 = 0``.

    ``detune`` shifts the integer ``m`` inside the diagonal ``J+`` couplings
    only; it is zero for the genuine model and used to break the QES property.
    """

    m: int
    p2: float = 1.0
    kappa0: float = 1.0
    detune: float = 0.0


@dataclass(frozen=True)
class TrigParams:
    n: int
    rho: float
    m: float
    m_tilde: float
    c: complex
    c_tilde: complex
    a: float = 0.0
    a_tilde: float = 0.0
    wtype: WType = WType.I
    offdiag: OffDiag = OffDiag.SINXCOSX
    d: complex = 0.0
    d_tilde: complex = 0.0


@dataclass(frozen=True)
class HyperParams:
    """Hyperbolic family; ``m``, ``m_tilde`` are the couplings, ``N = (m-1)/2``."""

    n: int
    rho: float
    m: float
    m_tilde: float
    c: complex
    d: complex
    c_tilde: complex
    d_tilde: complex

    @property
    def N(self) -> float:
        return (self.m - 1) / 2

    @property
    def N_tilde(self) -> float:
        return (self.m_tilde - 1) / 2

    @classmethod
    def from_N(cls, n, rho, N, N_tilde, c, d, c_tilde, d_tilde) -> "HyperParams":
        return cls(n, rho, 2 * N + 1, 2 * N_tilde + 1, c, d, c_tilde, d_tilde)


@dataclass(frozen=True)
class QuarticParams:
    """PT-symmetric quartic matrix model.

    ``a, b, d, w_tilde`` are the free real couplings and ``lam`` the complex
    gauge parameter of ``S = [[1, lam d/dx], [0, 1]]``. ``detune`` shifts the
    ``J+`` indices away from ``(n-2, n)``.
    """

    n: int
    a: float = 0.0
    b: float = 0.0
    d: float = 0.0
    w_tilde: float = 1.0
    lam: complex = 1.0
    detune: float = 0.0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("quartic model needs n >= 2")

    @property
    def b_shift(self) -> complex:
        """``B - A^2/4``, the combination that survives the gauge."""
        return self.b - self.a**2 / 4

    @property
    def omega(self) -> complex:
        return -2j * self.lam * self.n

    @property
    def d_tilde(self) -> complex:
        return self.d - self.a

    @property
    def c_x(self) -> complex:
        """Coefficient of ``i x`` in the first x-space diagonal potential."""
        return self.a**3 / 8 - self.a * self.b / 2 - 2 * self.n + 2

    @property
    def c_x_tilde(self) -> complex:
        return self.c_x - 4


# --- trigonometric ------------------------------------------------------------

HALF = 0.5
_TRIG_GAUGE = {
    WType.I: ((0.0, 0.0), (HALF, HALF)),
    WType.II: ((HALF, HALF), (0.0, 0.0)),
    WType.III: ((0.0, HALF), (HALF, 0.0)),
    WType.IV: ((HALF, 0.0), (0.0, HALF)),
}
# (z-exponent, (1-z)-exponent) of the off-diagonal trig factor
_OFFDIAG_FACTOR = {
    OffDiag.SINXCOSX: (HALF, HALF),
    OffDiag.COSX: (HALF, 0.0),
    OffDiag.SINX: (0.0, HALF),
    OffDiag.COS2X_PLUS_D: (0.0, 0.0),
}
_OTHER_GAUGE = {
    OffDiag.COS2X_PLUS_D: ((0.0, 0.0), (0.0, 0.0)),
    OffDiag.COSX: ((0.0, 0.0), (HALF, 0.0)),
    OffDiag.SINX: ((0.0, 0.0), (0.0, HALF)),
}


def _zpoly(a: float, b: float) -> np.ndarray:
    """Coefficients of ``z**a * (1 - z)**b`` for non-negative integer ``a, b``."""
    if a < 0 or b < 0 or a != int(a) or b != int(b):
        raise UnsupportedCombination(f"z^{a} (1-z)^{b} is not a polynomial")
    a, b = int(a), int(b)
    out = np.zeros(a + b + 1, dtype=np.complex128)
    for k in range(b + 1):
        out[a + k] = comb(b, k) * (-1) ** k
    return out


def _trig_diagonal(comp: int, rho, M, A, eps, phi) -> list[OpTerm]:
    ir = 1j * rho
    d2 = [0.0, -4.0, 4.0]
    d1 = [2 * (-1 - 4 * eps), 2 * (2 + 4 * eps + 4 * phi) - 8 * ir, 8 * ir]
    d0 = [
        rho**2 - M**2 + 8 * phi * eps + 2 * eps + 2 * phi + A - 8 * ir * (eps - (M - 1) / 4),
        -8 * ir * (-eps - phi + (M - 1) / 2),
    ]
    return (poly_terms(comp, comp, d2, 2) + poly_terms(comp, comp, d1, 1)
            + poly_terms(comp, comp, d0, 0))


def trig_profile(p: TrigParams) -> DegreeProfile:
    if p.offdiag is not OffDiag.SINXCOSX:
        return DegreeProfile(p.n, p.n)
    return {
        WType.I: DegreeProfile(p.n, p.n - 1),
        WType.II: DegreeProfile(p.n - 1, p.n),
        WType.III: DegreeProfile(p.n, p.n),
        WType.IV: DegreeProfile(p.n, p.n),
    }[p.wtype]


def trig_operator(p: TrigParams) -> tuple[MatrixDiffOp, DegreeProfile]:
    """Gauged trigonometric operator in ``z`` and its degree profile.

    For ``offdiag = SINXCOSX`` the wavefunction type picks the prefactors
    ``z^eps (1-z)^phi`` of each component (type i: ``(1, sin x cos x)``,
    ii: ``(sin x cos x, 1)``, iii: ``(sin x, cos x)``, iv: ``(cos x, sin x)``).
    The other off-diagonal forms are only built with type i, using the
    prefactors that keep the off-diagonal entries polynomial.
    """
    if p.offdiag is OffDiag.SINXCOSX:
        gauge = _TRIG_GAUGE[p.wtype]
    elif p.wtype is WType.I:
        gauge = _OTHER_GAUGE[p.offdiag]
    else:
        raise UnsupportedCombination(
            f"wavefunction type {p.wtype.value} is only defined for sinxcosx off-diagonals"
        )
    if p.n < 1:
        raise ValueError("trigonometric model needs n >= 1")
    (e1, f1), (e2, f2) = gauge
    eh, fh = _OFFDIAG_FACTOR[p.offdiag]
    up = _zpoly(e2 - e1 + eh, f2 - f1 + fh)
    down = _zpoly(e1 - e2 + eh, f1 - f2 + fh)
    if p.offdiag is OffDiag.COS2X_PLUS_D:
        h12 = np.convolve(up, [p.d - p.c, 2 * p.c])
        h21 = np.convolve(down, [p.d_tilde - p.c_tilde, 2 * p.c_tilde])
    else:
        h12 = p.c * up
        h21 = p.c_tilde * down
    terms = (
        _trig_diagonal(1, p.rho, p.m, p.a, e1, f1)
        + _trig_diagonal(2, p.rho, p.m_tilde, p.a_tilde, e2, f2)
        + poly_terms(1, 2, h12, 0)
        + poly_terms(2, 1, h21, 0)
    )
    return MatrixDiffOp(terms), trig_profile(p)


def trig_qes_params(
    n: int,
    m: float,
    rho: float,
    c: complex,
    wtype: WType = WType.I,
    a: float = 0.0,
    c_tilde: complex = 0.0,
) -> TrigParams:
    """Complete ``(M~, C~, A~)`` so the chosen wavefunction type is QES.

    Types i/ii: ``M + M~ = 4n`` and ``C C~ = 16 rho^2 (1 - 4n^2 + M M~)``.
    Types iii/iv: ``M + M~ = 4n + 2`` and ``C C~ = 16 rho^2 (M M~ - 4n(n+1))``.
    All types: ``A - A~ = M^2 - M~^2``. When ``c == 0`` the product must vanish
    and the given ``c_tilde`` is kept.
    """
    wtype = WType(wtype)
    if rho == 0:
        raise ValueError("rho must be nonzero")
    if wtype in (WType.I, WType.II):
        m_tilde = 4 * n - m
        product = 16 * rho**2 * ((1 - 4 * n**2) + m * m_tilde)
    else:
        m_tilde = 4 * n + 2 - m
        product = 16 * rho**2 * (m * m_tilde - 4 * n * (n + 1))
    if c == 0:
        if product != 0:
            raise ZeroDivisionError("C = 0 but the QES constraint needs C C~ != 0")
        ct = c_tilde
    else:
        ct = product / c
    return TrigParams(
        n=n, rho=rho, m=m, m_tilde=m_tilde, c=c, c_tilde=ct,
        a=a, a_tilde=a - (m**2 - m_tilde**2), wtype=wtype,
    )


# --- hyperbolic -----------------------------------------------------------------


def _hyper_diagonal(comp: int, rho, M) -> list[OpTerm]:
    ir = 1j * rho
    d2 = [0.0, -8.0, -4.0]
    d1 = [-4.0, -4.0 - 8 * ir, -4 * ir]
    d0 = [-rho**2 + 2 * ir * (M - 1) + M**2, 2 * ir * (M - 1)]
    return (poly_terms(comp, comp, d2, 2) + poly_terms(comp, comp, d1, 1)
            + poly_terms(comp, comp, d0, 0))


def hyper_operator(p: HyperParams) -> tuple[MatrixDiffOp, DegreeProfile]:
    """Gauged hyperbolic operator in ``z = cosh 2x - 1`` with profile ``(n, n)``."""
    terms = (
        _hyper_diagonal(1, p.rho, p.m)
        + _hyper_diagonal(2, p.rho, p.m_tilde)
        + poly_terms(1, 2, [p.c_tilde, p.c], 0)
        + poly_terms(2, 1, [p.d_tilde, p.d], 0)
    )
    return MatrixDiffOp(terms), DegreeProfile(p.n, p.n)


def hyper_qes_params(n: int, N: float, rho: float, c: complex, c_tilde: complex) -> HyperParams:
    """QES family labelled by ``N, rho, C, C~`` at fixed ``n``.

    ``N~ = 2n - 1 - N``, ``D = -16 rho^2 (n-N)(n-N~)/C``, top ray
    ``(1, 4 i rho (n-N)/C)`` and ``D~`` from the ``M0`` eigen-condition.
    """
    if rho == 0 or c == 0:
        raise ValueError("rho and C must be nonzero")
    if N == n:
        raise DegenerateKernel("N = n collapses the top-coefficient ray")
    N_tilde = 2 * n - 1 - N
    d = -16 * rho**2 * (n - N) * (n - N_tilde) / c
    alpha0, beta0 = 1.0, 4j * rho * (n - N) / c
    d_tilde = (c_tilde * beta0**2 + 4 * (N - N_tilde) * (2 * n + 1j * rho) * beta0 * alpha0) / alpha0**2
    return HyperParams.from_N(n, rho, N, N_tilde, c, d, c_tilde, d_tilde)


# --- quartic ----------------------------------------------------------------------


def quartic_operator(p: QuarticParams) -> tuple[MatrixDiffOp, DegreeProfile]:
    """``S^-1 H~ S`` for the quartic model; preserves ``(P_{n-2}, P_n)``."""
    b = p.b_shift
    lw = p.lam * p.w_tilde
    const = p.d + b**2 / 4
    shared = [(0, 2, -1.0), (1, 1, p.a), (0, 1, -1j * b), (0, 0, const)]
    k1 = p.n - 2 + p.detune
    k2 = p.n + p.detune
    e11 = shared + [(0, 1, -lw), (2, 1, 2j), (1, 0, -2j * k1), (0, 0, p.a / 2)]
    e22 = shared + [(0, 1, lw), (2, 1, 2j), (1, 0, -2j * k2), (0, 0, -p.a / 2)]
    op = MatrixDiffOp.from_entries({
        (1, 1): e11,
        (2, 2): e22,
        (1, 2): [(0, 2, -lw * p.lam)],
        (2, 1): [(0, 0, p.w_tilde)],
    })
    return op, DegreeProfile(p.n - 2, p.n)


# --- sextic -----------------------------------------------------------------------


def sextic_operator(p: SexticParams) -> tuple[MatrixDiffOp, DegreeProfile]:
    """Gauged sextic operator in ``x = y^2`` with profile ``(m-1, m)``."""
    if p.m < 1:
        raise ValueError("sextic model needs m >= 1")
    s = 8 * p.p2
    off = -8 * p.m * p.p2 * p.kappa0
    kin = [(1, 2, -4.0), (0, 1, -2.0)]
    op = MatrixDiffOp.from_entries({
        (1, 1): kin + [(2, 1, s), (1, 0, -s * (p.m - 2 + p.detune))],
        (2, 2): kin + [(2, 1, s), (1, 0, -s * (p.m + p.detune))],
        (1, 2): [(0, 0, off)],
        (2, 1): [(0, 0, off)],
    })
    return op, DegreeProfile(p.m - 1, p.m)


def build(params) -> tuple[MatrixDiffOp, DegreeProfile]:
    """Dispatch to the constructor matching the params type."""
    for cls, fn in _BUILDERS.items():
        if isinstance(params, cls):
            return fn(params)
    raise TypeError(f"unknown params type {type(params).__name__}")


_BUILDERS = {
    SexticParams: sextic_operator,
    TrigParams: trig_operator,
    HyperParams: hyper_operator,
    QuarticParams: quartic_operator,
}


# --- x-space potentials and PT symmetry -----------------------------------------


def potential_matrix(params, x: float) -> np.ndarray:
    """Original (un-gauged) 2x2 potential matrix at a point."""
    V = np.zeros((2, 2), dtype=np.complex128)
    if isinstance(params, TrigParams):
        c2 = np.cos(2 * x)
        V[0, 0] = (params.rho * c2 - 1j * params.m) ** 2 + params.a
        V[1, 1] = (params.rho * c2 - 1j * params.m_tilde) ** 2 + params.a_tilde
        f = {
            OffDiag.SINXCOSX: np.sin(x) * np.cos(x),
            OffDiag.COSX: np.cos(x),
            OffDiag.SINX: np.sin(x),
            OffDiag.COS2X_PLUS_D: c2,
        }[params.offdiag]
        V[0, 1] = params.c * f
        V[1, 0] = params.c_tilde * f
        if params.offdiag is OffDiag.COS2X_PLUS_D:
            V[0, 1] += params.d
            V[1, 0] += params.d_tilde
    elif isinstance(params, HyperParams):
        ch = np.cosh(2 * x)
        V[0, 0] = -((params.rho * ch - 1j * params.m) ** 2)
        V[1, 1] = -((params.rho * ch - 1j * params.m_tilde) ** 2)
        V[0, 1] = params.c * (ch - 1) + params.c_tilde
        V[1, 0] = params.d * (ch - 1) + params.d_tilde
    elif isinstance(params, QuarticParams):
        base = -(x**4) + 1j * params.a * x**3 + params.b * x**2
        V[0, 0] = base + 1j * params.c_x * x + params.d
        V[1, 1] = base + 1j * params.c_x_tilde * x + params.d_tilde
        V[0, 1] = params.omega
        V[1, 0] = params.w_tilde
    elif isinstance(params, SexticParams):
        p2, m, k0 = params.p2, params.m, params.kappa0
        scalar = 4 * p2**2 * x**6 + (-8 * m * p2 + 2 * p2) * x**2
        V[0, 0] = scalar + 8 * p2 * x**2
        V[1, 1] = scalar - 8 * p2 * x**2
        V[0, 1] = V[1, 0] = -8 * m * p2 * k0
    else:
        raise TypeError(f"unknown params type {type(params).__name__}")
    return V


def parity(params, x):
    """``pi/2 - x`` for the trigonometric family, ``-x`` otherwise."""
    if isinstance(params, TrigParams):
        return np.pi / 2 - x
    return -x


def pt_check(params, grid) -> float:
    """Largest ``||conj(V(P x)) - V(x)||`` over the grid (Frobenius norm)."""
    worst = 0.0
    for x in np.asarray(grid, dtype=float):
        diff = np.conj(potential_matrix(params, parity(params, x))) - potential_matrix(params, x)
        worst = max(worst, float(np.linalg.norm(diff)))
    return worst


# --- serialization ----------------------------------------------------------------

FAMILIES = {
    "sextic": SexticParams,
    "trig": TrigParams,
    "hyper": HyperParams,
    "quartic": QuarticParams,
}
_COMPLEX_FIELDS = {
    TrigParams: ("c", "c_tilde", "d", "d_tilde"),
    HyperParams: ("c", "d", "c_tilde", "d_tilde"),
    QuarticParams: ("lam",),
    SexticParams: (),
}


def family_of(params) -> str:
    for name, cls in FAMILIES.items():
        if isinstance(params, cls):
            return name
    raise TypeError(f"unknown params type {type(params).__name__}")


def params_to_dict(params) -> dict[str, Any]:
    cplx = _COMPLEX_FIELDS[type(params)]
    out: dict[str, Any] = {"family": family_of(params)}
    for f in dataclasses.fields(params):
        v = getattr(params, f.name)
        if f.name in cplx:
            v = complex(v)
            out[f"{f.name}_re"] = v.real
            out[f"{f.name}_im"] = v.imag
        elif isinstance(v, enum.Enum):
            out[f.name] = v.value
        else:
            out[f.name] = v
    return out


def params_from_dict(doc: Mapping[str, Any], family: str | None = None):
    family = family or doc.get("family")
    if family not in FAMILIES:
        raise ValueError(f"unknown or missing model family: {family!r}")
    cls = FAMILIES[family]
    cplx = _COMPLEX_FIELDS[cls]
    kwargs: dict[str, Any] = {}
    for f in dataclasses.fields(cls):
        if f.name in cplx:
            re_, im_ = doc.get(f"{f.name}_re"), doc.get(f"{f.name}_im")
            if re_ is None and im_ is None:
                if f.name in doc:
                    kwargs[f.name] = complex(doc[f.name])
                continue
            kwargs[f.name] = complex(re_ or 0.0, im_ or 0.0)
        elif f.name in doc:
            kwargs[f.name] = doc[f.name]
    if "wtype" in kwargs:
        kwargs["wtype"] = WType(str(kwargs["wtype"]).lower())
    if "offdiag" in kwargs:
        kwargs["offdiag"] = OffDiag(str(kwargs["offdiag"]).lower())
    return cls(**kwargs)


def params_to_json(params) -> str:
    return json.dumps(params_to_dict(params), indent=2)


def params_from_json(text: str, family: str | None = None):
    return params_from_dict(json.loads(text), family)


def params_to_toml(params) -> str:
    return tomli_w.dumps(params_to_dict(params))


def params_from_toml(text: str, family: str | None = None):
    return params_from_dict(tomllib.loads(text), family)
