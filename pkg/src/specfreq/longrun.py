"""Lag-product panel and long-run covariance estimation.

For each requested pair ``(i, j)`` and each time point ``t`` of the
shortened sample (``n_tilde = n - 2*l_n``), the lag-product vector collects

    (1/2pi) * { x_{i, t+m} * x_{j, t+l} - gamma_{i,j}(m - l) },   m = 0..2l,

where ``x`` is the mean-centered panel and ``gamma`` the matching sample
autocovariances.  Stacking pair blocks side by side gives an
``n_tilde x r(2l+1)`` matrix whose scaled row sums drive both the
long-run covariance estimate and the multiplier bootstrap.

The long-run covariance uses the Quadratic Spectral kernel with Andrews'
AR(1) plug-in bandwidth ``1.3221 * (a_hat * n_tilde)^{1/5}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientLength, InvalidParameter
from .spectral import BandwidthConfig
from .timeseries import AutocovSet, IndexSet, TimePanel, autocov

TWO_PI = 2.0 * math.pi

# Floor for the data-driven bandwidth: a_hat = 0 (white columns) would
# otherwise collapse the estimator to the lag-0 term only.
B_MIN = 1.0

# AR(1) coefficients are clipped before the (1 - rho)^{-8} terms.
RHO_CLIP = 0.97

QS_SERIES_CUTOFF = 1e-4


@dataclass(frozen=True)
class LagPanel:
    """Centered lag-product rows, one block of width ``2*l_n + 1`` per pair."""

    rows: np.ndarray
    pairs: IndexSet
    l_n: int
    n: int

    @property
    def n_tilde(self) -> int:
        return self.rows.shape[0]

    @property
    def block_width(self) -> int:
        return 2 * self.l_n + 1

    @property
    def d(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class LongRunCov:
    """Symmetric long-run covariance of the lag-product rows."""

    matrix: np.ndarray
    bandwidth_used: float


def qs_weight(u):
    """Quadratic Spectral kernel ``K(u)``; ``K(0) = 1``.

    Near the origin the closed form suffers catastrophic cancellation, so a
    series expansion is used for ``|u| < 1e-4``.
    """
    u = np.asarray(u, dtype=np.float64)
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    x = 1.2 * math.pi * np.abs(u)
    out = np.empty_like(x)
    small = np.abs(u) < QS_SERIES_CUTOFF
    xs = x[small]
    out[small] = 1.0 - xs**2 / 10.0 + xs**4 / 280.0
    xl = x[~small]
    out[~small] = 3.0 / xl**2 * (np.sin(xl) / xl - np.cos(xl))
    return float(out[0]) if scalar else out


def build_lag_panel(
    panel: TimePanel, pairs: IndexSet, bw: BandwidthConfig, acov: AutocovSet | None = None
) -> LagPanel:
    """Assemble the lag-product matrix for ``pairs`` at bandwidth ``bw``.

    ``acov`` may pass in autocovariances already computed on the same panel
    (they must cover lags ``+-l_n``); otherwise they are computed here.
    """
    pairs.validate_for(panel.p)
    l = bw.l_n
    nt = bw.n_tilde(panel.n)
    if acov is None:
        acov = autocov(panel, l)
    elif acov.max_lag < l:
        raise InsufficientLength(f"autocovariances cover lags +-{acov.max_lag} < l_n={l}")
    x = panel.centered()
    ii = pairs.row_indices()
    jj = pairs.col_indices()
    m = 2 * l + 1
    # gam_sel[ell, m] = gamma_{i_ell, j_ell}(m - l)
    gam_sel = acov.gamma[acov.max_lag - l : acov.max_lag + l + 1, ii, jj].T
    t_idx = np.arange(nt)
    # first factor runs over offsets 0..2l, second is pinned at offset l
    lead = x[t_idx[:, None, None] + np.arange(m)[None, None, :], ii[None, :, None]]
    anchor = x[t_idx[:, None] + l, jj[None, :]]
    rows = (lead * anchor[:, :, None] - gam_sel[None, :, :]) / TWO_PI
    return LagPanel(rows=rows.reshape(nt, pairs.r * m), pairs=pairs, l_n=l, n=panel.n)


def andrews_bandwidth(lagpanel: LagPanel) -> float:
    """Data-driven Quadratic Spectral bandwidth from per-column AR(1) fits.

    Each column gets an intercept-free least-squares AR(1) fit; columns
    whose fit is degenerate (no variation, or an exact fit) drop out of
    both sums.  The result is floored at ``B_MIN``.
    """
    c = lagpanel.rows
    nt = c.shape[0]
    if nt < 3:
        raise InsufficientLength(f"need n_tilde >= 3 for AR(1) fits, got {nt}")
    prev, cur = c[:-1], c[1:]
    denom = np.einsum("tj,tj->j", prev, prev)
    ok = denom > 0.0
    rho = np.zeros(c.shape[1])
    rho[ok] = np.einsum("tj,tj->j", prev[:, ok], cur[:, ok]) / denom[ok]
    resid = cur - rho[None, :] * prev
    sigma2 = np.einsum("tj,tj->j", resid, resid) / (nt - 1)
    ok &= sigma2 > 0.0
    if not ok.any():
        return B_MIN
    rho_c = np.clip(rho[ok], -RHO_CLIP, RHO_CLIP)
    s4 = sigma2[ok] ** 2
    num = np.sum(4.0 * rho_c**2 * s4 / (1.0 - rho_c) ** 8)
    den = np.sum(s4 / (1.0 - rho_c) ** 4)
    a_hat = num / den
    return max(1.3221 * (a_hat * nt) ** 0.2, B_MIN)


def qs_toeplitz(n_tilde: int, b_n: float) -> np.ndarray:
    """The ``n_tilde x n_tilde`` Toeplitz matrix with entries K((i-j)/b_n)."""
    from scipy.linalg import toeplitz

    col = qs_weight(np.arange(n_tilde) / b_n)
    return toeplitz(col)


def estimate_longrun(lagpanel: LagPanel, b_n: float) -> LongRunCov:
    """Kernel-weighted long-run covariance of the lag-product rows.

    Computed as ``C^T Theta C / n_tilde`` with ``Theta`` the Quadratic
    Spectral Toeplitz weight matrix, which equals the lag-sum
    ``sum_q K(q/b_n) Pi(q)`` over all lags exactly.
    """
    if b_n <= 0.0:
        raise InvalidParameter(f"bandwidth b_n must be positive, got {b_n}")
    c = lagpanel.rows
    theta = qs_toeplitz(c.shape[0], b_n)
    xi = c.T @ (theta @ c) / c.shape[0]
    return LongRunCov(matrix=xi, bandwidth_used=float(b_n))


def longrun_to_rows(cov: LongRunCov):
    """Yield (row, col, value) triples for debugging CSV export."""
    d = cov.matrix.shape[0]
    for i in range(d):
        for j in range(d):
            yield (i + 1, j + 1, float(cov.matrix[i, j]))
