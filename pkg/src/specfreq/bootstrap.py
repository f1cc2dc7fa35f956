"""Gaussian multiplier bootstrap for the sup-max spectral statistic.

One bootstrap draw perturbs the lag-product rows by correlated Gaussian
multipliers ``eps ~ N(0, Theta)``, ``Theta[s, t] = K((s - t)/b_n)`` with the
same Quadratic Spectral kernel and bandwidth used for the long-run
covariance.  The scaled sum ``S = n_tilde^{-1/2} * sum_t eps_t c_t`` is then
pushed through the per-frequency projections; the draw's value is

    xi = max over frequencies and pair blocks of (re^2 + im^2),

whose conditional law mimics the null distribution of the test statistic.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InvalidParameter
from .longrun import LagPanel, qs_toeplitz
from .rng import STREAM_MULTIPLIER, substream
from .spectral import BandwidthConfig, FlatTopKernel, FreqProjection, projection_stack
from .timeseries import FrequencySet

JITTER_MAX = 1e-6

# Frequencies are processed in chunks of this many grid points when
# projecting the scaled sums, to bound peak memory on interval grids.
FREQ_CHUNK = 4


@dataclass(frozen=True)
class MultiplierConfig:
    """Bootstrap sampling parameters."""

    B: int = 1000
    seed: int = 0
    jitter: float = 1e-10

    def __post_init__(self):
        if self.B < 1:
            raise InvalidParameter(f"bootstrap size B must be >= 1, got {self.B}")
        if self.jitter < 0.0:
            raise InvalidParameter("jitter must be non-negative")


@dataclass(frozen=True)
class ToeplitzFactor:
    """Lower-triangular factor reproducing the multiplier covariance."""

    dim: int
    first_row: np.ndarray
    chol: np.ndarray
    jitter_used: float
    fallback: bool = False


@dataclass(frozen=True)
class BootstrapDraws:
    """The bootstrap sample of xi values, ordered by draw index."""

    xi: np.ndarray
    per_draw_seed_offsets: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))


def factor_theta(n_tilde: int, b_n: float, jitter: float = 1e-10) -> ToeplitzFactor:
    """Factor ``Theta + jitter*I`` for multiplier sampling.

    Cholesky is attempted with the given jitter, escalating tenfold up to
    ``1e-6``; if that still fails, a symmetric eigendecomposition with
    negative eigenvalues clipped to zero is used and a warning is issued.
    """
    if n_tilde < 1:
        raise InvalidParameter(f"n_tilde must be >= 1, got {n_tilde}")
    if b_n <= 0.0:
        raise InvalidParameter(f"b_n must be positive, got {b_n}")
    theta = qs_toeplitz(n_tilde, b_n)
    first_row = theta[0].copy()
    diag = np.einsum("ii->i", theta)  # writable view of the diagonal
    j = max(float(jitter), 0.0)
    diag += j
    while True:
        try:
            chol = np.linalg.cholesky(theta)
            return ToeplitzFactor(dim=n_tilde, first_row=first_row, chol=chol, jitter_used=j)
        except np.linalg.LinAlgError:
            if j >= JITTER_MAX:
                break
            step = 1e-10 if j == 0.0 else min(j * 10.0, JITTER_MAX) - j
            diag += step
            j += step
    warnings.warn(
        f"Cholesky of the multiplier covariance failed up to jitter {JITTER_MAX}; "
        "falling back to a clipped eigendecomposition",
        RuntimeWarning,
        stacklevel=2,
    )
    diag -= j  # eigendecompose the unjittered matrix
    vals, vecs = np.linalg.eigh(theta)
    root = vecs * np.sqrt(np.clip(vals, 0.0, None))[None, :]
    return ToeplitzFactor(
        dim=n_tilde, first_row=first_row, chol=root, jitter_used=j, fallback=True
    )


def draw_multipliers(factor: ToeplitzFactor, rng: np.random.Generator) -> np.ndarray:
    """One multiplier vector ``factor.chol @ z`` with ``z`` i.i.d. standard normal."""
    return factor.chol @ rng.standard_normal(factor.dim)


def xi_draw(lagpanel: LagPanel, projections: list[FreqProjection], eps: np.ndarray) -> float:
    """The sup-max statistic of a single multiplier draw.

    ``S = n_tilde^{-1/2} * C^T eps`` is formed once; each projection maps
    every pair block of ``S`` to a (real, imag) pair whose squared norm is
    maximized over blocks and frequencies.
    """
    eps = np.asarray(eps, dtype=np.float64)
    c = lagpanel.rows
    if eps.shape != (c.shape[0],):
        raise DimensionMismatch(f"eps has shape {eps.shape}, expected ({c.shape[0]},)")
    m = lagpanel.block_width
    if any(proj.rows.shape != (2, m) for proj in projections):
        raise DimensionMismatch(f"projection width does not match block width {m}")
    if not projections:
        raise InvalidParameter("need at least one frequency projection")
    s = (c.T @ eps / np.sqrt(c.shape[0])).reshape(lagpanel.pairs.r, m)
    best = 0.0
    for proj in projections:
        parts = s @ proj.rows.T
        best = max(best, float(np.max(parts[:, 0] ** 2 + parts[:, 1] ** 2)))
    return best


def run_bootstrap(
    lagpanel: LagPanel,
    freqs: FrequencySet,
    bw: BandwidthConfig,
    kernel: FlatTopKernel,
    b_n: float,
    cfg: MultiplierConfig,
    stream_id: int = 0,
    factor: ToeplitzFactor | None = None,
) -> BootstrapDraws:
    """Draw ``cfg.B`` independent bootstrap statistics.

    Draws come from the Philox stream addressed by
    ``(cfg.seed, STREAM_MULTIPLIER, stream_id)``; draw ``b`` consumes block
    ``b`` of that stream, so the result is reproducible and independent of
    how the linear algebra is batched.  The frequency grid is the same one
    the test statistic is evaluated on.

    Two algebraically identical evaluation orders are used depending on
    shape: projecting the factored covariance first when few
    (frequency x pair) components are needed, otherwise materializing the
    scaled sums per draw.
    """
    if bw.l_n != lagpanel.l_n:
        raise DimensionMismatch(f"bandwidth l_n={bw.l_n} does not match lag panel l_n={lagpanel.l_n}")
    nt = lagpanel.n_tilde
    if factor is None:
        factor = factor_theta(nt, b_n, cfg.jitter)
    elif factor.dim != nt:
        raise DimensionMismatch(f"factor dim {factor.dim} != n_tilde {nt}")
    omegas = freqs.evaluate(lagpanel.n)
    proj = projection_stack(bw, kernel, omegas)  # (G, 2, m)
    r, m = lagpanel.pairs.r, lagpanel.block_width
    g = omegas.size
    B = cfg.B

    rng = substream(cfg.seed, STREAM_MULTIPLIER, stream_id)
    # draw b consumes the b-th contiguous block of the stream, so a longer
    # run extends a shorter one with the same seed
    z = rng.standard_normal((B, nt)).T

    d = lagpanel.d
    cost_literal = B * nt * (nt + d)
    cost_projected = 2 * r * g * nt * (nt + B)
    if cost_projected < cost_literal:
        # eta = [P C^T / sqrt(nt)] L z, assembled once for all draws
        blocks = lagpanel.rows.reshape(nt, r, m)
        w1 = np.einsum("gam,trm->grat", proj, blocks).reshape(g * r * 2, nt) / np.sqrt(nt)
        eta = ((w1 @ factor.chol) @ z).reshape(g, r, 2, B)
        xi = np.einsum("grab,grab->grb", eta, eta).max(axis=(0, 1))
    else:
        eps = factor.chol @ z  # (nt, B)
        s_all = (lagpanel.rows.T @ eps / np.sqrt(nt)).reshape(r, m, B)
        xi = np.zeros(B)
        for lo in range(0, g, FREQ_CHUNK):
            chunk = proj[lo : lo + FREQ_CHUNK]
            eta = np.einsum("gam,rmb->grab", chunk, s_all)
            np.maximum(xi, np.einsum("grab,grab->grb", eta, eta).max(axis=(0, 1)), out=xi)
    return BootstrapDraws(xi=xi, per_draw_seed_offsets=np.arange(B, dtype=np.int64))
