"""Banded Toeplitz Gramians, their Cholesky factors and the all-pass map.

A prototype ``g`` of length ``N = 2m + 1`` padded by ``Q`` on each side
gives a ``D x D`` symmetric Toeplitz matrix, ``D = 2Q + N``, with main
diagonal ``g[m] + gamma`` and ``k``-th off-diagonals ``g[m + k]``. Only the
half band is stored. Upper-triangular factors use the LAPACK upper band
layout: ``band[m + i - j, j] = C[i, j]``.

Worked 7 x 7 example (``g = [0.5, 1.25, 0.5]``, ``Q = 2``, ``M = 2``)::

    D  = 2Q + N = 7
    j* = Q + M - 1 = 3          (the matrix centre, 0-based)
    c_approx[k] = C[j* - k, j*] (column j* read upwards from the diagonal)

so ``c_approx = [C[3, 3], C[2, 3]]``; as ``Q`` grows this tends to the
minimum-phase factor ``[1, 0.5]`` of ``g``, with an error that shrinks
like ``max|z|^(2Q)`` over the zeros ``z`` of that factor.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .signal_core import FirFilter, LinearPhasePrototype, as_taps, autocorrelation

__all__ = [
    "NotPositiveDefinite",
    "GramianSystem",
    "CholeskyFactor",
    "AllPassMatrix",
    "build_gramian",
    "min_eigenvalue",
    "cholesky",
    "extract_minphase",
    "build_allpass",
    "default_padding",
    "MAX_EIG_DIMENSION",
]

MAX_EIG_DIMENSION = 5000


class NotPositiveDefinite(ArithmeticError):
    """A Cholesky pivot was not positive.

    For a lifted prototype this means the lift is below the waterfall
    point; for a transform input it means a zero sits on the unit circle.
    """

    def __init__(self, index: int, pivot: float, hint: str = ""):
        self.index = int(index)
        self.pivot = float(pivot)
        msg = f"non-positive pivot {pivot:.6g} at index {index}"
        if hint:
            msg += f"; {hint}"
        super().__init__(msg)


def default_padding(n_taps: int) -> int:
    """Ten times the prototype length."""
    return 10 * int(n_taps)


@dataclass(frozen=True)
class GramianSystem:
    prototype: LinearPhasePrototype
    Q: int
    gamma: float = 0.0

    def __post_init__(self):
        if int(self.Q) < 1:
            raise ValueError("padding Q must be at least 1")
        if not self.gamma >= 0:
            raise ValueError("lift gamma must be nonnegative")
        object.__setattr__(self, "Q", int(self.Q))
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def bandwidth(self) -> int:
        return self.prototype.center

    @property
    def dimension(self) -> int:
        return 2 * self.Q + len(self.prototype)

    @property
    def half_band(self) -> np.ndarray:
        """``[g[m] + gamma, g[m+1], ..., g[2m]]``."""
        hb = np.array(self.prototype.half)
        hb[0] += self.gamma
        return hb

    def upper_band(self) -> np.ndarray:
        """The matrix in LAPACK upper band storage, shape ``(m + 1, D)``."""
        m, D = self.bandwidth, self.dimension
        hb = self.half_band
        ab = np.zeros((m + 1, D))
        for d in range(m + 1):
            ab[m - d, d:] = hb[d]
        return ab

    def dense(self) -> np.ndarray:
        col = np.zeros(self.dimension)
        col[: self.bandwidth + 1] = self.half_band
        return linalg.toeplitz(col)


@dataclass(frozen=True)
class CholeskyFactor:
    """Upper-triangular banded ``C`` with ``C.T @ C = G_adj``."""

    band: np.ndarray
    Q: int

    @property
    def bandwidth(self) -> int:
        return self.band.shape[0] - 1

    @property
    def dimension(self) -> int:
        return self.band.shape[1]

    def dense(self) -> np.ndarray:
        m, D = self.bandwidth, self.dimension
        C = np.zeros((D, D))
        for d in range(m + 1):
            idx = np.arange(d, D)
            C[idx - d, idx] = self.band[m - d, d:]
        return C

    def column(self, j: int) -> np.ndarray:
        """Entries ``C[j - k, j]`` for ``k = 0..m`` (zero above row 0)."""
        return np.array(self.band[::-1, j])

    def solve(self, b) -> np.ndarray:
        """Solve ``C x = b``."""
        return linalg.solve_banded((0, self.bandwidth), self.band, b)

    def solve_transposed(self, b) -> np.ndarray:
        """Solve ``C.T x = b``."""
        m = self.bandwidth
        lower = np.zeros_like(self.band)
        for k in range(m + 1):
            lower[k, : self.dimension - k] = self.band[m - k, k:]
        return linalg.solve_banded((m, 0), lower, b)


def build_gramian(g, Q: int, gamma: float = 0.0) -> GramianSystem:
    if not isinstance(g, LinearPhasePrototype):
        g = LinearPhasePrototype(as_taps(g))
    return GramianSystem(g, Q, gamma)


def min_eigenvalue(sys: GramianSystem) -> float:
    """Smallest eigenvalue of the banded Gramian (LAPACK ``dsbevx``)."""
    if sys.dimension > MAX_EIG_DIMENSION:
        raise ValueError(f"dimension {sys.dimension} exceeds {MAX_EIG_DIMENSION}")
    w = linalg.eigvals_banded(sys.upper_band(), lower=False, select="i",
                              select_range=(0, 0))
    return float(w[0])


def cholesky(sys: GramianSystem) -> CholeskyFactor:
    """Banded Cholesky ``G_adj = C.T @ C``, one column of ``C`` at a time.

    Raises :class:`NotPositiveDefinite` with the failing pivot index.
    """
    m, D = sys.bandwidth, sys.dimension
    hb = sys.half_band
    U = np.zeros((m + 1, D))
    for j in range(D):
        lo = max(0, j - m)
        # off-diagonal entries C[i, j], i = lo .. j-1
        for i in range(lo, j):
            acc = hb[j - i]
            if i > lo:
                acc -= np.dot(U[m - i + lo:m, i], U[m - j + lo:m - j + i, j])
            U[m - j + i, j] = acc / U[m, i]
        piv = hb[0]
        if j > lo:
            v = U[m - j + lo:m, j]
            piv -= np.dot(v, v)
        if not piv > 0:
            raise NotPositiveDefinite(j, piv)
        U[m, j] = np.sqrt(piv)
    return CholeskyFactor(U, sys.Q)


def extract_minphase(C: CholeskyFactor, M: int | None = None) -> FirFilter:
    """Read the approximate minimum-phase filter at the symmetry point.

    ``c[k] = C[j* - k, j*]`` with ``j* = Q + M - 1``; ``M`` defaults to
    ``bandwidth + 1``.
    """
    m = C.bandwidth
    M = m + 1 if M is None else int(M)
    if not 1 <= M <= m + 1:
        raise ValueError(f"cannot extract {M} taps from bandwidth {m}")
    if C.Q < M:
        raise ValueError(f"padding Q={C.Q} is below the filter length {M}")
    j = C.Q + M - 1
    if j >= C.dimension:
        raise ValueError("symmetry point outside the factor")
    return FirFilter(C.column(j)[:M])


@dataclass(frozen=True)
class AllPassMatrix:
    """``F = inv(C.T) @ H.T`` held in product form.

    ``H`` is the full convolution matrix of ``h`` with ``D + M - 1`` rows,
    so ``H.T @ H`` equals the Toeplitz Gramian exactly and ``F`` has
    orthonormal rows. ``F`` maps the augmented input ``H[:, j*]`` to the
    column ``C[:, j*]``.
    """

    h: np.ndarray
    factor: CholeskyFactor

    @property
    def Q(self) -> int:
        return self.factor.Q

    @property
    def length(self) -> int:
        return self.h.size

    @property
    def symmetry_index(self) -> int:
        return self.Q + self.length - 1

    @property
    def shape(self):
        D = self.factor.dimension
        return D, D + self.length - 1

    def conv_matrix(self) -> np.ndarray:
        D, R = self.shape
        M = self.length
        H = np.zeros((R, D))
        for a in range(D):
            # rows a .. a+M-1 hold h[M-1] .. h[0]
            H[a:a + M, a] = self.h[::-1]
        return H

    def dense(self) -> np.ndarray:
        C = self.factor.dense()
        return linalg.solve_triangular(C.T, self.conv_matrix().T, lower=True)

    def row(self, i: int) -> np.ndarray:
        D = self.factor.dimension
        e = np.zeros(D)
        e[i] = 1.0
        x = self.factor.solve(e)
        return np.convolve(x, self.h[::-1])

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.factor.solve_transposed(self.conv_matrix().T @ x)

    def augmented_input(self) -> np.ndarray:
        return self.conv_matrix()[:, self.symmetry_index]

    def prefilter(self) -> np.ndarray:
        """Anti-causal taps ``f`` of the symmetry row.

        ``f[j]`` is the entry ``j`` places before the row's last nonzero
        position, so that ``c[i] ~= sum_j f[j] h[j + i]``.
        """
        j = self.symmetry_index
        row = self.row(j)
        return row[: j + self.length][::-1]


def build_allpass(h, Q: int) -> AllPassMatrix:
    h = np.array(as_taps(h))
    g = autocorrelation(h)
    try:
        C = cholesky(build_gramian(g, Q, 0.0))
    except NotPositiveDefinite as exc:
        raise NotPositiveDefinite(exc.index, exc.pivot,
                                  "input has a zero on or near the unit circle") from None
    return AllPassMatrix(h, C)
