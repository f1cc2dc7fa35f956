"""Lag-window cross-spectral density estimation with a flat-top kernel.

The estimate at frequency ``w`` is

    Fhat(w) = (1/2pi) * sum_{k=-l..l} W(k/l) * gamma(k) * exp(-i k w),

where ``gamma(k)`` are the divisor-``n`` sample autocovariances and ``W`` is
the flat-top lag window: identically 1 on ``[-c, c]``, linear down to 0 at
``|u| = 1``, and 0 beyond.  The flat-top shape trades positive
semi-definiteness of the estimate for lower bias; coherence therefore
guards against non-positive auto-spectra in its denominator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter, NonPositiveAutoSpectrum
from .timeseries import AutocovSet, FrequencySet, IndexSet, TimePanel, autocov

AUTOSPECTRUM_TOL = 1e-12


@dataclass(frozen=True)
class FlatTopKernel:
    """Flat-top lag window with plateau half-width ``c`` in ``(0, 1]``."""

    c: float = 0.5

    def __post_init__(self):
        if not (0.0 < self.c <= 1.0):
            raise InvalidParameter(f"flat-top c must be in (0, 1], got {self.c}")

    def weight(self, u) -> np.ndarray | float:
        return flat_top_weight(self, u)


def flat_top_weight(kernel: FlatTopKernel, u):
    """Evaluate the flat-top window at ``u`` (scalar or array)."""
    u = np.abs(np.asarray(u, dtype=np.float64))
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    w = np.zeros_like(u)
    w[u <= kernel.c] = 1.0
    if kernel.c < 1.0:
        ramp = (u > kernel.c) & (u <= 1.0)
        w[ramp] = (u[ramp] - 1.0) / (kernel.c - 1.0)
    return float(w[0]) if scalar else w


@dataclass(frozen=True)
class BandwidthConfig:
    """Lag-window bandwidth ``l_n``; requires ``n - 2*l_n >= 2`` when used."""

    l_n: int

    def __post_init__(self):
        if int(self.l_n) < 1:
            raise InvalidParameter(f"bandwidth l_n must be >= 1, got {self.l_n}")
        object.__setattr__(self, "l_n", int(self.l_n))

    def n_tilde(self, n: int) -> int:
        nt = n - 2 * self.l_n
        if nt < 2:
            raise InvalidParameter(f"n - 2*l_n = {nt} < 2 (n={n}, l_n={self.l_n})")
        return nt

    def lags(self) -> np.ndarray:
        return np.arange(-self.l_n, self.l_n + 1)


def default_bandwidth(r: int) -> BandwidthConfig:
    """Bandwidth rule ``l_n = max(round(0.1 * ln r), 1)``.

    ``round`` is round-half-to-even.  ``r`` is the number of index pairs
    under test.
    """
    if r < 1:
        raise InvalidParameter(f"pair count r must be >= 1, got {r}")
    return BandwidthConfig(l_n=max(round(0.1 * np.log(r)), 1))


@dataclass(frozen=True)
class SpectralEstimate:
    """Estimated spectral density matrices on a frequency grid.

    ``matrices[g]`` is the complex ``p x p`` Hermitian estimate at
    ``frequencies[g]``.
    """

    frequencies: np.ndarray
    matrices: np.ndarray
    l_n: int
    c: float
    n: int

    def at(self, omega: float) -> np.ndarray:
        g = self._index_of(omega)
        return self.matrices[g]

    def entry(self, i: int, j: int, omega: float) -> complex:
        """f_hat_{i,j}(omega) with 1-based series indices."""
        return complex(self.matrices[self._index_of(omega), i - 1, j - 1])

    def _index_of(self, omega: float) -> int:
        hits = np.nonzero(np.isclose(self.frequencies, omega, rtol=0.0, atol=1e-12))[0]
        if hits.size == 0:
            raise InvalidParameter(f"frequency {omega} not on the evaluated grid")
        return int(hits[0])

    def to_rows(self):
        """Yield (omega, i, j, re, im) rows for CSV export (1-based i, j)."""
        p = self.matrices.shape[1]
        for g, w in enumerate(self.frequencies):
            for i in range(p):
                for j in range(p):
                    z = self.matrices[g, i, j]
                    yield (float(w), i + 1, j + 1, float(z.real), float(z.imag))


@dataclass(frozen=True)
class FreqProjection:
    """The 2 x (2l+1) frequency projection at ``omega``.

    Row 1 holds ``l^{-1/2} W(k/l) cos(k w)`` and row 2 holds
    ``-l^{-1/2} W(k/l) sin(k w)`` for ``k = -l..l``; applied to a lag-product
    block it yields the real and imaginary components of the scaled
    cross-spectrum estimate.
    """

    omega: float
    rows: np.ndarray


def freq_projection(bw: BandwidthConfig, kernel: FlatTopKernel, omega: float) -> FreqProjection:
    """Build the projection matrix mapping a lag block to (real, imag) parts."""
    rows = projection_stack(bw, kernel, np.array([omega], dtype=np.float64))[0]
    return FreqProjection(omega=float(omega), rows=rows)


def projection_stack(bw: BandwidthConfig, kernel: FlatTopKernel, omegas: np.ndarray) -> np.ndarray:
    """Stack of projection matrices, shape (len(omegas), 2, 2l+1)."""
    k = bw.lags()
    w = flat_top_weight(kernel, k / bw.l_n)
    kw = np.asarray(omegas, dtype=np.float64)[:, None] * k[None, :]
    scale = 1.0 / np.sqrt(bw.l_n)
    out = np.empty((kw.shape[0], 2, k.size), dtype=np.float64)
    out[:, 0, :] = scale * w * np.cos(kw)
    out[:, 1, :] = -scale * w * np.sin(kw)
    return out


def spectrum_from_autocov(
    acov: AutocovSet, bw: BandwidthConfig, kernel: FlatTopKernel, omegas: np.ndarray
) -> np.ndarray:
    """Evaluate the lag-window estimate from precomputed autocovariances."""
    if acov.max_lag < bw.l_n:
        raise InvalidParameter(f"autocovariances cover lags +-{acov.max_lag} < l_n={bw.l_n}")
    l = bw.l_n
    w = flat_top_weight(kernel, np.arange(1, l + 1) / l)
    gamma0 = acov.at(0)
    omegas = np.asarray(omegas, dtype=np.float64)
    out = np.empty((omegas.size, gamma0.shape[0], gamma0.shape[1]), dtype=np.complex128)
    out[:] = gamma0
    for k in range(1, l + 1):
        if w[k - 1] == 0.0:
            continue
        g = acov.at(k)
        phase = w[k - 1] * np.exp(-1j * k * omegas)
        # gamma(-k) = gamma(k)^T pairs off with the conjugate phase, keeping
        # the sum Hermitian to the bit.
        out += phase[:, None, None] * g[None, :, :]
        out += np.conj(phase)[:, None, None] * g.T[None, :, :]
    out /= 2.0 * np.pi
    return out


def estimate_spectrum(
    panel: TimePanel,
    bw: BandwidthConfig,
    kernel: FlatTopKernel,
    freqs: FrequencySet,
    pairs: IndexSet | None = None,
) -> SpectralEstimate:
    """Lag-window spectral density estimate on the grid defined by ``freqs``.

    The full ``p x p`` matrix is computed at every grid frequency, so all
    auto-spectra (and hence coherences) are available regardless of the
    requested ``pairs``; ``pairs`` is validated against the panel dimension.
    """
    bw.n_tilde(panel.n)
    if pairs is not None:
        pairs.validate_for(panel.p)
    omegas = freqs.evaluate(panel.n)
    acov = autocov(panel, bw.l_n)
    matrices = spectrum_from_autocov(acov, bw, kernel, omegas)
    return SpectralEstimate(
        frequencies=omegas, matrices=matrices, l_n=bw.l_n, c=kernel.c, n=panel.n
    )


def coherence(est: SpectralEstimate, i: int, j: int, omega: float) -> complex:
    """Plug-in coherence ``f_{i,j} / sqrt(f_{i,i} f_{j,j})`` at ``omega``.

    Raises :class:`NonPositiveAutoSpectrum` when either auto-spectrum is at
    or below the positivity tolerance.
    """
    g = est._index_of(omega)
    f_ii = est.matrices[g, i - 1, i - 1].real
    f_jj = est.matrices[g, j - 1, j - 1].real
    if f_ii <= AUTOSPECTRUM_TOL or f_jj <= AUTOSPECTRUM_TOL:
        raise NonPositiveAutoSpectrum(
            f"auto-spectrum <= {AUTOSPECTRUM_TOL} at omega={omega} for pair ({i}, {j})"
        )
    return complex(est.matrices[g, i - 1, j - 1] / np.sqrt(f_ii * f_jj))
