"""Orchard-Wilson lag equations and their damped least-squares solution.

For a candidate minimum-phase filter ``c`` of length ``M`` and a prototype
``g`` of length ``2M - 1`` (centre ``m = M - 1``) the residual is

    e[k] = sum_{n=0}^{M-1-k} c[n] c[n+k] - g[m + k],    k = 0 .. M-1.

Writing the prototype with the conventional reversed index, ``g[m + k]``
is ``g[M - 1 - k]``: lag 0 pairs with the centre tap and lag ``M - 1``
with the outermost one. Everything else in the package uses lag order.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .signal_core import FirFilter, LinearPhasePrototype, as_taps, autocorrelation

__all__ = [
    "ResidualReport",
    "SolverConfig",
    "NonConvergence",
    "residual",
    "jacobian",
    "hessian",
    "refine",
    "verify_definition",
    "FLOOR_TARGET",
]

# residual level treated as "at the floor" when deciding convergence failure
FLOOR_TARGET = 1e-12


@dataclass(frozen=True)
class ResidualReport:
    residual: np.ndarray
    norm: float
    iterations: int = 0
    converged: bool = True
    trace: tuple = field(default=(), repr=False)

    @classmethod
    def from_residual(cls, e, **kw) -> "ResidualReport":
        e = np.array(e, dtype=float)
        e.setflags(write=False)
        return cls(e, float(np.sqrt(np.dot(e, e))), **kw)

    def to_dict(self) -> dict:
        return {
            "residual": [float(x) for x in self.residual],
            "E_L2": self.norm,
            "iterations": self.iterations,
            "converged": self.converged,
        }

    def trace_lines(self):
        """Solver trace as JSON lines ``{"iteration", "lambda", "E_L2"}``."""
        for it, lam, err in self.trace:
            yield json.dumps({"iteration": it, "lambda": lam, "E_L2": err})


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 200
    gradient_tolerance: float = 1e-16
    step_tolerance: float = 1e-16
    initial_damping: float = 1e-3
    # one exact-Hessian Newton step after the damped iteration
    newton_polish: bool = False

    def __post_init__(self):
        for name in ("max_iterations", "gradient_tolerance", "step_tolerance",
                     "initial_damping"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


class NonConvergence(RuntimeError):
    """The iteration budget ran out with the residual above the floor."""

    def __init__(self, c: FirFilter, report: ResidualReport):
        self.c = c
        self.report = report
        super().__init__(
            f"no convergence after {report.iterations} accepted steps, "
            f"E_L2={report.norm:.3e}; the lift may be below the waterfall point")


def _check_lengths(c, g):
    if g.size != 2 * c.size - 1:
        raise ValueError(
            f"filter of length {c.size} needs a prototype of length {2 * c.size - 1}, "
            f"got {g.size}")


def _residual_vec(c, g):
    M = c.size
    return autocorrelation(c).taps[M - 1:] - g[M - 1:]


def residual(c, g_adj) -> ResidualReport:
    c, g = as_taps(c), as_taps(g_adj)
    _check_lengths(c, g)
    return ResidualReport.from_residual(_residual_vec(c, g))


def jacobian(c) -> np.ndarray:
    """``J[k, j] = d e[k] / d c[j] = c[j + k] + c[j - k]`` (out-of-range terms zero)."""
    c = as_taps(c)
    M = c.size
    J = np.zeros((M, M))
    for k in range(M):
        J[k, : M - k] += c[k:]
        J[k, k:] += c[: M - k]
    return J


def hessian(c, e) -> np.ndarray:
    """Exact Hessian of ``0.5 * |e|^2``: ``J.T J + sum_k e[k] d2 e[k]``."""
    c, e = as_taps(c), as_taps(e)
    M = c.size
    J = jacobian(c)
    H = J.T @ J
    # d2 e[k] / dc[a] dc[b] = [b == a + k] + [a == b + k]
    for k in range(M):
        idx = np.arange(M - k)
        H[idx, idx + k] += e[k]
        H[idx + k, idx] += e[k]
    return H


def _damped_step(J, e, lam, eye):
    # least-squares form of (J.T J + lam I) d = -J.T e; avoids squaring cond(J)
    A = np.vstack([J, np.sqrt(lam) * eye])
    b = np.concatenate([-e, np.zeros(e.size)])
    return np.linalg.lstsq(A, b, rcond=None)[0]


def refine(c0, g_adj, cfg: SolverConfig | None = None):
    """Levenberg-Marquardt solution of the lag equations from ``c0``.

    Each iteration first tries the undamped Gauss-Newton step and keeps it
    if it lowers ``E_L2``. Otherwise the damped step solving
    ``(J.T J + lam I) d = -J.T e`` is tried; it is taken when it lowers
    ``E_L2`` (then ``lam /= 10``), else ``lam *= 10``. The
    iteration stops on ``max|J.T e| < gradient_tolerance`` or
    ``max|d| < step_tolerance``. ``iterations`` counts accepted steps.

    Returns ``(c, report)``. Raises :class:`NonConvergence` when the budget
    is exhausted with ``E_L2`` above 1e-12.
    """
    cfg = cfg or SolverConfig()
    c = np.array(as_taps(c0), dtype=float)
    g = as_taps(g_adj)
    _check_lengths(c, g)
    M = c.size
    eye = np.eye(M)

    e = _residual_vec(c, g)
    err = float(np.sqrt(e @ e))
    lam = cfg.initial_damping
    trace = [(0, lam, err)]
    accepted = 0
    converged = False
    for _ in range(cfg.max_iterations):
        J = jacobian(c)
        grad = J.T @ e
        if np.max(np.abs(grad)) < cfg.gradient_tolerance:
            converged = True
            break
        # undamped Gauss-Newton first: near a double-root-free solution the
        # smallest singular value of J can sit far below sqrt(lam), and any
        # damping then stalls the iteration
        gn = np.linalg.lstsq(J, -e, rcond=None)[0]
        if np.max(np.abs(gn)) < cfg.step_tolerance:
            converged = True
            break
        e_new = _residual_vec(c + gn, g)
        err_new = float(np.sqrt(e_new @ e_new))
        if err_new < err:
            c, e, err = c + gn, e_new, err_new
            accepted += 1
            trace.append((accepted, 0.0, err))
            continue
        step = _damped_step(J, e, lam, eye)
        if np.max(np.abs(step)) < cfg.step_tolerance:
            converged = True
            break
        trial = c + step
        e_new = _residual_vec(trial, g)
        err_new = float(np.sqrt(e_new @ e_new))
        if err_new < err:
            c, e, err = trial, e_new, err_new
            lam = max(lam / 10.0, 1e-300)
            accepted += 1
            trace.append((accepted, lam, err))
        else:
            lam *= 10.0

    if cfg.newton_polish:
        try:
            step = np.linalg.solve(hessian(c, e), -(jacobian(c).T @ e))
            e_new = _residual_vec(c + step, g)
            err_new = float(np.sqrt(e_new @ e_new))
            if err_new < err:
                c, e, err = c + step, e_new, err_new
                accepted += 1
                trace.append((accepted, 0.0, err))
        except np.linalg.LinAlgError:
            pass

    report = ResidualReport.from_residual(e, iterations=accepted,
                                          converged=converged, trace=tuple(trace))
    out = FirFilter(c)
    if not converged and report.norm > FLOOR_TARGET:
        raise NonConvergence(out, report)
    return out, report


def verify_definition(c, g_adj, tol: float) -> bool:
    """Factorability test: a real ``c`` reproduces ``g_adj`` with ``E_L2 <= tol``.

    Taps are real by construction here, so only the residual is checked.
    """
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    taps = as_taps(c)
    if not np.all(np.isreal(taps)):
        return False
    return residual(taps, g_adj).norm <= tol
