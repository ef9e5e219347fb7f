"""Minimum-phase Chebyshev design by lifting an equiripple prototype.

The flow: measure the most negative amplitude ripple of the prototype
(``gamma_psd``), lift the centre tap by ``gamma = gamma_psd + eps`` so the
Gramian becomes positive definite, scale, factor by Cholesky for an
initial guess and polish with :func:`~minphase.orchard_wilson.refine`.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .gramian import NotPositiveDefinite, build_gramian, cholesky, default_padding, extract_minphase
from .orchard_wilson import NonConvergence, ResidualReport, SolverConfig, refine
from .signal_core import FirFilter, LinearPhasePrototype, amplitude_extremum, as_taps

__all__ = [
    "DesignSpec",
    "LinearPhaseRipples",
    "LiftReport",
    "WaterfallPoint",
    "DesignFailure",
    "convert_ripples",
    "measure_gamma_psd",
    "peak_amplitude",
    "lift_prototype",
    "initial_guess",
    "solve_lifted",
    "waterfall_sweep",
    "design_minphase",
    "RESIDUAL_TARGET",
]

RESIDUAL_TARGET = 1e-14
AUTO_SPAN = (1e-16, 1e-6)
AUTO_ITERATIONS = 40


class DesignFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class DesignSpec:
    """Minimum-phase lowpass target: ripples in linear units, edges in rad/sample."""

    delta_p: float
    delta_a: float
    omega_p: float
    omega_s: float

    def __post_init__(self):
        if not 0 < self.delta_a < self.delta_p < 1:
            raise ValueError("need 0 < delta_a < delta_p < 1")
        if not 0 < self.omega_p < self.omega_s < math.pi:
            raise ValueError("need 0 < omega_p < omega_s < pi")


@dataclass(frozen=True)
class LinearPhaseRipples:
    passband: float
    stopband: float


def convert_ripples(spec: DesignSpec) -> LinearPhaseRipples:
    """Prototype ripples equivalent to a minimum-phase target.

    ``Dp = 4 dp / (2 + 2 dp^2 - da^2)``, ``Da = da^2 / (2 + 2 dp^2 - da^2)``.
    """
    dp, da = spec.delta_p, spec.delta_a
    den = 2.0 + 2.0 * dp * dp - da * da
    return LinearPhaseRipples(4.0 * dp / den, da * da / den)


def measure_gamma_psd(g) -> float:
    """Magnitude of the most negative amplitude value, 0 if there is none.

    Always evaluated on the realized taps, never on design values.
    """
    _, amin = amplitude_extremum(g, "min")
    return max(-amin, 0.0)


def peak_amplitude(g) -> float:
    return amplitude_extremum(g, "max")[1]


def _as_prototype(g):
    return g if isinstance(g, LinearPhasePrototype) else LinearPhasePrototype(as_taps(g))


def lift_prototype(g, gamma: float, scale="peak"):
    """Return ``(s * (g + gamma * delta_centre), s)``.

    ``scale="peak"`` picks ``s = 1 / max(A + gamma)`` so the lifted
    amplitude peaks at one; ``"none"`` keeps ``s = 1``; a number is used
    as given.
    """
    g = _as_prototype(g)
    if scale == "peak":
        s = 1.0 / (peak_amplitude(g) + gamma)
    elif scale == "none" or scale is None:
        s = 1.0
    else:
        s = float(scale)
    if not s > 0:
        raise ValueError("scale must be positive")
    return g.lifted(gamma, s), s


def initial_guess(g_adj: LinearPhasePrototype, Q: int):
    """Cholesky start ``(c_approx, Q_used)``, or ``None`` if no padding works.

    When the factorization breaks down at pivot ``j`` the leading ``j``
    rows are still positive definite, so the padding is cut to the largest
    ``Q`` whose matrix fits inside that block and the factorization is
    retried.
    """
    N = len(g_adj)
    M = g_adj.center + 1
    while Q >= M:
        try:
            C = cholesky(build_gramian(g_adj, Q, 0.0))
        except NotPositiveDefinite as exc:
            Q = min(Q - 1, (exc.index - N) // 2)
            continue
        return extract_minphase(C, M), Q
    return None


@dataclass(frozen=True)
class WaterfallPoint:
    gamma: float
    offset: float
    norm: float
    converged: bool

    def as_row(self):
        return self.gamma, self.offset, self.norm, self.converged


@dataclass(frozen=True)
class _Solution:
    c: FirFilter | None
    c_approx: FirFilter | None
    report: ResidualReport | None
    scale: float
    Q: int

    @property
    def norm(self):
        return self.report.norm if self.report is not None else math.inf


def solve_lifted(g, gamma: float, Q: int, cfg: SolverConfig | None = None,
                 scale="peak") -> _Solution:
    """Lift, scale, initialize by Cholesky and refine; never raises on
    non-convergence (the last iterate is kept)."""
    g_adj, s = lift_prototype(g, gamma, scale)
    start = initial_guess(g_adj, Q)
    if start is None:
        return _Solution(None, None, None, s, 0)
    c0, q_used = start
    try:
        c, rep = refine(c0, g_adj, cfg)
    except NonConvergence as exc:
        c, rep = exc.c, exc.report
    return _Solution(c, c0, rep, s, q_used)


def _sweep_point(args):
    g, gamma_psd, offset, Q, cfg, scale = args
    gamma = gamma_psd + offset
    if gamma < 0:
        return WaterfallPoint(gamma, offset, math.inf, False)
    sol = solve_lifted(g, gamma, Q, cfg, scale)
    ok = sol.report is not None and sol.report.converged
    return WaterfallPoint(gamma, offset, sol.norm, ok)


def waterfall_sweep(g, offsets, Q: int | None = None, cfg: SolverConfig | None = None,
                    scale="peak", jobs: int = 1) -> list[WaterfallPoint]:
    """Residual norm after refinement for each ``gamma = gamma_psd + offset``.

    Points that cannot be initialized carry ``norm = inf``. Results follow
    the input order whatever ``jobs`` is.
    """
    g = _as_prototype(g)
    Q = default_padding(len(g)) if Q is None else int(Q)
    cfg = cfg or SolverConfig()
    gp = measure_gamma_psd(g)
    tasks = [(g, gp, float(o), Q, cfg, scale) for o in offsets]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_point, tasks))
    return [_sweep_point(t) for t in tasks]


@dataclass(frozen=True)
class LiftReport:
    gamma_psd: float
    gamma_final: float
    offset: float
    scale: float
    Q: int
    residual: ResidualReport
    c_approx: FirFilter
    waterfall: tuple = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {
            "gamma_psd": self.gamma_psd,
            "gamma_final": self.gamma_final,
            "offset": self.offset,
            "scale": self.scale,
            "Q": self.Q,
            "c_approx": [float(x) for x in self.c_approx.taps],
            "residual": self.residual.to_dict(),
            "waterfall": [list(p) for p in self.waterfall],
        }


def design_minphase(g, Q: int | None = None, cfg: SolverConfig | None = None,
                    epsilon="auto", scale="peak"):
    """Design the minimum-phase factor of a lifted equiripple prototype.

    With ``epsilon="auto"`` the offset above ``gamma_psd`` is the smallest
    value in ``[1e-16, 1e-6] * gamma_psd`` (log-bisection, 40 steps) whose
    refined residual is at most 1e-14. A prototype with nonnegative
    amplitude is factored without lifting.

    Returns ``(c, LiftReport)``; raises :class:`DesignFailure` when no
    offset reaches the residual target.
    """
    g = _as_prototype(g)
    Q = default_padding(len(g)) if Q is None else int(Q)
    cfg = cfg or SolverConfig()
    gp = measure_gamma_psd(g)
    curve = {}

    def attempt(eps):
        sol = solve_lifted(g, gp + eps, Q, cfg, scale)
        curve[eps] = (gp + eps, eps, sol.norm)
        return sol

    if epsilon == "auto" or epsilon is None:
        if gp == 0.0:
            best, eps = attempt(0.0), 0.0
        else:
            lo, hi = AUTO_SPAN[0] * gp, AUTO_SPAN[1] * gp
            best = attempt(hi)
            if best.norm > RESIDUAL_TARGET:
                raise DesignFailure(
                    f"E_L2={best.norm:.3e} even at offset {hi:.3e}")
            eps = hi
            low = attempt(lo)
            if low.norm <= RESIDUAL_TARGET:
                best, eps = low, lo
            else:
                a, b = math.log(lo), math.log(hi)
                for _ in range(AUTO_ITERATIONS):
                    mid = math.exp(0.5 * (a + b))
                    sol = attempt(mid)
                    if sol.norm <= RESIDUAL_TARGET:
                        b, best, eps = math.log(mid), sol, mid
                    else:
                        a = math.log(mid)
    else:
        eps = float(epsilon)
        best = attempt(eps)
        if best.c is None:
            raise DesignFailure(f"no positive definite Gramian at offset {eps:.3e}")
        if best.norm > RESIDUAL_TARGET:
            raise DesignFailure(
                f"E_L2={best.norm:.3e} above {RESIDUAL_TARGET:g} at offset {eps:.3e}")

    report = LiftReport(
        gamma_psd=gp,
        gamma_final=gp + eps,
        offset=eps,
        scale=best.scale,
        Q=best.Q,
        residual=best.report,
        c_approx=best.c_approx,
        waterfall=tuple(curve[k] for k in sorted(curve)),
    )
    return best.c, report
