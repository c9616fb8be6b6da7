"""Shared corpus and independent oracles for the test suite."""
from __future__ import annotations

import dataclasses

import numpy as np

from qeslab.models import (
    QuarticParams,
    SexticParams,
    WType,
    hyper_qes_params,
    trig_qes_params,
)


def corpus():
    """(label, params) for every certified model instance used across tests."""
    out = []
    for m in (1, 2, 3):
        out.append((f"sextic-m{m}", SexticParams(m, 1.0, 1.3)))
    for wt in WType:
        for n in (1, 2):
            out.append((f"trig-{wt.value}-n{n}", trig_qes_params(n, 0.7, 0.3, 1.0, wt)))
    for n, N in ((1, 0.0), (1, 0.3), (2, 1.0), (2, 0.4)):
        out.append((f"hyper-n{n}-N{N}", hyper_qes_params(n, N, 0.8, 1.0 + 0.5j, 0.7)))
    for n in (2, 3, 4):
        out.append((f"quartic-n{n}", QuarticParams(n, 1.0, 1.0, 0.0, 0.5, 1.0)))
    return out


def perturbed(params, eps: float = 0.1):
    """Shift one constrained quantity of a certified instance by ``eps``."""
    name = type(params).__name__
    if name in ("SexticParams", "QuarticParams"):
        return dataclasses.replace(params, detune=params.detune + eps)
    if name == "TrigParams":
        return dataclasses.replace(params, m_tilde=params.m_tilde + eps)
    if name == "HyperParams":
        return dataclasses.replace(params, d=params.d + eps)
    raise TypeError(name)


def trig_fourier_spectrum(p, K: int = 40) -> np.ndarray:
    """Eigenvalues of the x-space trigonometric Hamiltonian in a plane-wave basis.

    Uses ``exp(i (2k + s) x)``, ``|k| <= K``, for both ``s = 0`` (period pi) and
    ``s = 1`` (anti-periodic), so every wavefunction type is represented. Only
    the ``sin x cos x`` off-diagonal is supported.
    """
    ks = np.arange(-K, K + 1)
    size = ks.size

    def mult(coefs):
        # coefs: shift (in units of exp(2ix)) -> value
        T = np.zeros((size, size), dtype=complex)
        for s, v in coefs.items():
            idx = np.arange(size)
            ok = (idx + s >= 0) & (idx + s < size)
            T[idx[ok] + s, idx[ok]] += v
        return T

    def diag_pot(M, A):
        # (rho cos2x - i M)^2 + A
        r = p.rho
        return mult({0: r**2 / 2 - M**2 + A, 2: r**2 / 4, -2: r**2 / 4,
                     1: -1j * M * r, -1: -1j * M * r})

    # sin x cos x = sin(2x) / 2
    sc = {1: 1 / (4j), -1: -1 / (4j)}
    out = []
    for s in (0, 1):
        kin = np.diag((2.0 * ks + s) ** 2).astype(complex)
        H = np.block([
            [kin + diag_pot(p.m, p.a), mult({k: p.c * v for k, v in sc.items()})],
            [mult({k: p.c_tilde * v for k, v in sc.items()}), kin + diag_pot(p.m_tilde, p.a_tilde)],
        ])
        out.append(np.linalg.eigvals(H))
    return np.concatenate(out)


def nearest_distance(values, pool) -> float:
    pool = np.asarray(pool)
    return max(float(np.min(np.abs(pool - v))) for v in np.atleast_1d(values))
