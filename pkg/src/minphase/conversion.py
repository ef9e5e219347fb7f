"""Arbitrary-phase to minimum-phase conversion.

The autocorrelation of an FIR ``h`` is a linear-phase prototype that is
already nonnegative on the unit circle, so no lift is needed: its
Gramian is factored directly, the symmetry-point column gives a start
for the lag equations, and the symmetry-point row of the all-pass matrix
gives the anti-causal prefilter ``f`` with ``c[i] ~= sum_j f[j] h[j + i]``.

An MMSE decision-feedback baseline is provided for comparison.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gramian import NotPositiveDefinite, build_allpass, default_padding, extract_minphase
from .orchard_wilson import NonConvergence, ResidualReport, SolverConfig, refine, residual
from .signal_core import (
    FirFilter,
    FrequencyGrid,
    as_taps,
    autocorrelation,
    frequency_response_magnitude,
)

__all__ = [
    "TransformResult",
    "MmseConfig",
    "transform",
    "mmse_transform",
    "spectral_equality_check",
]

LIFT_HINT = ("the filter has a zero on or too near the unit circle; "
             "lift its autocorrelation and use design_minphase instead")


@dataclass(frozen=True)
class TransformResult:
    c: FirFilter
    f_taps: np.ndarray
    residual: ResidualReport
    spectral_error: float

    def zeros(self) -> np.ndarray:
        from .signal_core import zeros

        return zeros(self.c)

    def to_dict(self) -> dict:
        out = {
            "c": [float(x) for x in self.c.taps],
            "f": [float(x) for x in self.f_taps],
            "residual": self.residual.to_dict(),
            "spectral_error": self.spectral_error,
        }
        if 2 <= len(self.c) <= 64 and self.c.taps[0] != 0:
            z = self.zeros()
            out["zeros"] = [[float(v.real), float(v.imag)] for v in z]
            out["max_zero_modulus"] = float(np.max(np.abs(z))) if z.size else 0.0
        return out


@dataclass(frozen=True)
class MmseConfig:
    """Feedforward length ``plen = P + 1`` (None means ten times the
    filter length) and noise variance ``sigma2``."""

    plen: int | None = None
    sigma2: float = 1e-4

    def __post_init__(self):
        if self.plen is not None and int(self.plen) < 1:
            raise ValueError("feedforward length must be positive")
        if not self.sigma2 >= 0:
            raise ValueError("noise variance must be nonnegative")

    def length_for(self, M: int) -> int:
        P1 = 10 * M if self.plen is None else int(self.plen)
        if P1 < M:
            raise ValueError(f"feedforward length {P1} is shorter than the filter ({M})")
        return P1


def spectral_equality_check(h, c, grid=None) -> float:
    """``max | |C(w)| - |H(w)| |`` over the grid."""
    h, c = as_taps(h), as_taps(c)
    if h.size != c.size:
        raise ValueError("filters must have the same length")
    grid = grid if grid is not None else FrequencyGrid.from_env()
    return float(np.max(np.abs(frequency_response_magnitude(c, grid)
                               - frequency_response_magnitude(h, grid))))


def transform(h, Q: int | None = None, cfg: SolverConfig | None = None,
              grid=None) -> TransformResult:
    """Minimum-phase equivalent of ``h`` and its anti-causal prefilter.

    ``Q`` defaults to ten times the autocorrelation length. Raises
    :class:`~minphase.gramian.NotPositiveDefinite` for a zero on the unit
    circle.
    """
    h = FirFilter(as_taps(h))
    M = len(h)
    g = autocorrelation(h)
    Q = default_padding(len(g)) if Q is None else int(Q)
    Q = max(Q, M)
    try:
        F = build_allpass(h.taps, Q)
    except NotPositiveDefinite as exc:
        raise NotPositiveDefinite(exc.index, exc.pivot, LIFT_HINT) from None
    c0 = extract_minphase(F.factor, M)
    try:
        c, rep = refine(c0, g, cfg)
    except NonConvergence as exc:
        # the autocorrelation is factorable, so this is a conditioning issue
        c, rep = exc.c, exc.report
    return TransformResult(c, F.prefilter(), rep, spectral_equality_check(h, c, grid))


def _dfe_covariances(h, P1, sigma2):
    # y[n + j] = sum_t h[j + t] s[n - t], j = 0..P, t = -P..M-1
    M = h.size
    ts = np.arange(-(P1 - 1), M)
    Hy = np.zeros((P1, ts.size))
    for j in range(P1):
        for col, t in enumerate(ts):
            if 0 <= j + t < M:
                Hy[j, col] = h[j + t]
    return Hy, ts


def mmse_transform(h, cfg: MmseConfig | None = None, grid=None) -> TransformResult:
    """MMSE decision-feedback baseline.

    ``s[n]`` (unit-variance white symbols) is estimated jointly from the
    window ``y[n .. n+P]`` of the noisy channel output and the past
    symbols ``s[n-1 .. n-M+1]``. The feedforward weights form the
    anti-causal ``f``; ``c[i] = sum_j f[j] h[j + i]`` is the monic-target
    response, then ``c`` and ``f`` are scaled together so that
    ``|c|^2`` equals the energy of ``h``.
    """
    cfg = cfg or MmseConfig()
    h = as_taps(h)
    M = h.size
    if not np.any(h):
        raise ValueError("all-zero filter")
    P1 = cfg.length_for(M)
    Hy, ts = _dfe_covariances(h, P1, cfg.sigma2)
    past = [int(np.nonzero(ts == i)[0][0]) for i in range(1, M)]
    now = int(np.nonzero(ts == 0)[0][0])

    n = P1 + M - 1
    R = np.zeros((n, n))
    R[:P1, :P1] = Hy @ Hy.T + cfg.sigma2 * np.eye(P1)
    if past:
        X = Hy[:, past]
        R[:P1, P1:] = X
        R[P1:, :P1] = X.T
        R[P1:, P1:] = np.eye(M - 1)
    r = np.zeros(n)
    r[:P1] = Hy[:, now]
    try:
        w = np.linalg.solve(R, r)
    except np.linalg.LinAlgError:
        raise np.linalg.LinAlgError("singular MMSE normal equations; use sigma2 > 0") from None
    if not np.all(np.isfinite(w)):
        raise np.linalg.LinAlgError("singular MMSE normal equations; use sigma2 > 0")

    f = w[:P1]
    c = np.array([np.dot(f[: M - i], h[i:]) for i in range(M)])
    k = np.sqrt(np.dot(h, h) / np.dot(c, c))
    c, f = k * c, k * f
    rep = residual(c, autocorrelation(h))
    return TransformResult(FirFilter(c), f, rep, spectral_equality_check(h, c, grid))
