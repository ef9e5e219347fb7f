"""FIR primitives: tap containers, convolution, zero-phase amplitude,
magnitude response and minimum-phase diagnostics.

Time runs causally: ``taps[n]`` multiplies the input delayed by ``n``
samples. A linear-phase prototype is stored as its full symmetric tap
vector of odd length ``2*m + 1``; lag ``k`` lives at index ``m + k``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FirFilter",
    "LinearPhasePrototype",
    "FrequencyGrid",
    "DEFAULT_GRID_COUNT",
    "MAX_ROOT_ORDER",
    "as_taps",
    "convolve",
    "autocorrelation",
    "amplitude_response",
    "amplitude_extremum",
    "frequency_response_magnitude",
    "zeros",
    "energy_concentration",
    "reflect_zeros",
    "poly_from_zeros",
]

DEFAULT_GRID_COUNT = 4096
MAX_ROOT_ORDER = 64
SYMMETRY_RTOL = 1e-15


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def as_taps(x) -> np.ndarray:
    """Return a 1-D float array from a filter object or array-like."""
    if isinstance(x, (FirFilter, LinearPhasePrototype)):
        return x.taps
    a = np.asarray(x, dtype=float)
    if a.ndim != 1:
        raise ValueError("tap vector must be one-dimensional")
    return a


@dataclass(frozen=True)
class FirFilter:
    """A causal real FIR filter."""

    taps: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.taps, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise ValueError("FIR filter needs at least one tap")
        if not np.all(np.isfinite(t)):
            raise ValueError("FIR taps must be finite")
        object.__setattr__(self, "taps", _frozen(t))

    def __len__(self):
        return self.taps.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.taps, dtype=dtype)

    def reversed(self) -> "FirFilter":
        return FirFilter(self.taps[::-1])


@dataclass(frozen=True)
class LinearPhasePrototype:
    """Odd-length symmetric tap vector ``g``.

    Construction checks symmetry to a relative tolerance of 1e-15 and then
    averages mirrored taps, so the stored vector is exactly symmetric.
    ``meta`` carries optional band/ripple annotations and is not compared.
    """

    taps: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        t = np.asarray(self.taps, dtype=float)
        if t.ndim != 1 or t.size % 2 != 1:
            raise ValueError("linear-phase prototype needs an odd number of taps")
        if not np.all(np.isfinite(t)):
            raise ValueError("prototype taps must be finite")
        scale = max(np.max(np.abs(t)), np.finfo(float).tiny)
        if np.max(np.abs(t - t[::-1])) > SYMMETRY_RTOL * scale:
            raise ValueError("prototype taps are not symmetric")
        t = 0.5 * (t + t[::-1])
        object.__setattr__(self, "taps", _frozen(t))

    def __len__(self):
        return self.taps.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.taps, dtype=dtype)

    @property
    def center(self) -> int:
        return (self.taps.size - 1) // 2

    @property
    def half(self) -> np.ndarray:
        """Causal half ``[g[m], g[m+1], ..., g[2m]]``, i.e. lags 0..m."""
        return self.taps[self.center:]

    def lifted(self, gamma: float, scale: float = 1.0) -> "LinearPhasePrototype":
        """Return ``scale * (g + gamma * delta_center)``."""
        t = np.array(self.taps)
        t[self.center] += gamma
        return LinearPhasePrototype(scale * t, dict(self.meta))

    @classmethod
    def from_half(cls, half) -> "LinearPhasePrototype":
        half = np.asarray(half, dtype=float)
        return cls(np.concatenate([half[:0:-1], half]))


@dataclass(frozen=True)
class FrequencyGrid:
    """``count`` uniformly spaced frequencies covering [0, pi] inclusive."""

    count: int = DEFAULT_GRID_COUNT

    def __post_init__(self):
        if int(self.count) < 2:
            raise ValueError("grid needs at least two points")
        object.__setattr__(self, "count", int(self.count))

    @property
    def samples(self) -> np.ndarray:
        return np.linspace(0.0, np.pi, self.count)

    @classmethod
    def from_env(cls, var: str = "MINPHASE_GRID") -> "FrequencyGrid":
        value = os.environ.get(var)
        return cls(int(value)) if value else cls()


def _as_prototype(g) -> LinearPhasePrototype:
    if isinstance(g, LinearPhasePrototype):
        return g
    return LinearPhasePrototype(as_taps(g))


def convolve(a, b) -> FirFilter:
    """Full linear convolution of two FIR filters.

    Terms of each output sample are accumulated in increasing index of
    ``a``; :func:`autocorrelation` relies on this fixed order.
    """
    a, b = as_taps(a), as_taps(b)
    if a.size == 0 or b.size == 0:
        raise ValueError("cannot convolve an empty filter")
    out = np.zeros(a.size + b.size - 1)
    for k, ak in enumerate(a):
        out[k:k + b.size] += ak * b
    return FirFilter(out)


def autocorrelation(h) -> LinearPhasePrototype:
    """Deterministic autocorrelation ``h * reverse(h)`` of length ``2M - 1``.

    The centre tap is the filter energy. The half computed by
    :func:`convolve` is mirrored, which matches the full convolution
    bit for bit.
    """
    h = as_taps(h)
    full = convolve(h, h[::-1]).taps
    m = h.size - 1
    r = np.empty_like(full)
    r[m:] = full[m:]
    r[:m] = full[m + 1:][::-1]
    return LinearPhasePrototype(r)


def _cos_matrix(omega, m):
    return np.cos(np.outer(np.asarray(omega, dtype=float), np.arange(1, m + 1)))


def amplitude_response(g, grid=None) -> np.ndarray:
    """Zero-phase amplitude ``A(w) = g[m] + 2 sum_k g[m+k] cos(k w)``.

    ``grid`` may be a :class:`FrequencyGrid`, an array of frequencies or
    None for the default 4096-point grid. ``A`` is real and may be
    negative.
    """
    g = _as_prototype(g)
    w = _grid_samples(grid)
    half = g.half
    if half.size == 1:
        return np.full(w.shape, half[0])
    return half[0] + 2.0 * _cos_matrix(w, half.size - 1) @ half[1:]


def _grid_samples(grid):
    if grid is None:
        return FrequencyGrid().samples
    if isinstance(grid, FrequencyGrid):
        return grid.samples
    return np.atleast_1d(np.asarray(grid, dtype=float))


def _amp_derivs(half, w):
    k = np.arange(1, half.size)
    a = half[1:]
    s, c = np.sin(k * w), np.cos(k * w)
    return -2.0 * np.dot(k * a, s), -2.0 * np.dot(k * k * a, c)


def amplitude_extremum(g, kind: str = "min", count: int = DEFAULT_GRID_COUNT,
                       tol: float = 1e-13, max_iter: int = 60):
    """Locate the global minimum (or maximum) of ``A`` on [0, pi].

    A dense scan picks the best grid point, then a Newton iteration on
    ``A'`` (the parabola through the exact local derivatives) refines it
    until the step is below ``tol``. The iterate is kept inside the
    bracketing grid cells; Newton steps that leave it fall back to
    bisection on the sign of ``A'``.

    Returns ``(omega, value)``.
    """
    g = _as_prototype(g)
    half = g.half
    if half.size == 1:
        return 0.0, float(half[0])
    sign = 1.0 if kind == "min" else -1.0
    if kind not in ("min", "max"):
        raise ValueError("kind must be 'min' or 'max'")
    w = np.linspace(0.0, np.pi, count)
    a = sign * amplitude_response(g, w)
    i = int(np.argmin(a))
    lo, hi = w[max(i - 1, 0)], w[min(i + 1, count - 1)]
    x = w[i]
    for _ in range(max_iter):
        d1, d2 = _amp_derivs(half, x)
        d1, d2 = sign * d1, sign * d2
        if d2 > 0:
            step = -d1 / d2
        else:
            step = np.inf
        xn = x + step
        if not (lo <= xn <= hi):
            # shrink the bracket towards the descent side
            if d1 > 0:
                hi = x
            else:
                lo = x
            xn = 0.5 * (lo + hi)
        if abs(xn - x) < tol:
            x = xn
            break
        x = xn
    best = [(sign * float(amplitude_response(g, [x])[0]), x)]
    # endpoints are stationary; make sure the refinement did not lose them
    for e in (0.0, np.pi):
        best.append((sign * float(amplitude_response(g, [e])[0]), e))
    val, x = min(best)
    return float(x), sign * val


def frequency_response_magnitude(h, grid=None) -> np.ndarray:
    """``|H(w)| = |sum_n h[n] exp(-i w n)|`` on the grid."""
    h = as_taps(h)
    w = _grid_samples(grid)
    n = np.arange(h.size)
    return np.abs(np.exp(-1j * np.outer(w, n)) @ h)


def zeros(h) -> np.ndarray:
    """Roots of ``h[0] z^(M-1) + ... + h[M-1]`` via companion eigenvalues.

    A diagnostic for short filters only: orders above 64 are refused since
    root finding loses accuracy quickly with order. Leading zero taps are
    not stripped; they are rejected.
    """
    h = as_taps(h)
    if not np.any(h):
        raise ValueError("all-zero filter has no defined zeros")
    if h.size > MAX_ROOT_ORDER:
        raise ValueError(f"root finding refused above {MAX_ROOT_ORDER} taps")
    if h[0] == 0:
        raise ValueError("leading tap must be nonzero")
    if h.size == 1:
        return np.zeros(0, dtype=complex)
    n = h.size - 1
    comp = np.zeros((n, n))
    comp[0, :] = -h[1:] / h[0]
    comp[np.arange(1, n), np.arange(n - 1)] = 1.0
    return np.linalg.eigvals(comp).astype(complex)


def poly_from_zeros(z, lead: float = 1.0) -> np.ndarray:
    """Real tap vector ``lead * prod(1 - z_i x^-1)`` from conjugate-closed zeros."""
    p = np.poly(np.asarray(z, dtype=complex)) if len(z) else np.ones(1)
    return lead * np.real(p)


def reflect_zeros(h, which) -> np.ndarray:
    """Reflect the zeros at indices ``which`` to ``1/conj(z)``.

    Each reflected factor ``(1 - z x^-1)`` becomes ``(conj(z) - x^-1)``,
    which leaves ``|H|`` on the unit circle unchanged. Pass both members of
    a conjugate pair to keep the result real.
    """
    h = as_taps(h)
    z = zeros(h)
    which = set(int(i) for i in which)
    lead = complex(h[0])
    out = []
    for i, zi in enumerate(z):
        if i in which:
            lead *= np.conj(zi)
            out.append(1.0 / np.conj(zi))
        else:
            out.append(zi)
    taps = lead * np.poly(np.array(out))
    if np.max(np.abs(taps.imag)) > 1e-9 * np.max(np.abs(taps)):
        raise ValueError("reflection of an unpaired complex zero")
    return taps.real


def energy_concentration(h) -> np.ndarray:
    """Partial energies ``P[k] = sum_{n<=k} h[n]^2``."""
    h = as_taps(h)
    return np.cumsum(h * h)
