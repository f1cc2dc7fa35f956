"""Max-type global test of a zero cross-spectrum over pairs and frequencies.

The statistic is ``T = (n/l_n) * max |f_hat_{i,j}(w)|^2`` over the requested
pairs and the evaluated frequency grid.  Its null distribution is
calibrated by the Gaussian multiplier bootstrap: the critical value at
level ``alpha`` is the ``floor(B*alpha)``-th largest bootstrap draw, and the
p-value uses the add-one rank rule ``(1 + #{xi_b >= T}) / (B + 1)`` so it is
never exactly zero.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any

import numpy as np

from .bootstrap import BootstrapDraws, MultiplierConfig, run_bootstrap
from .errors import InvalidParameter
from .longrun import andrews_bandwidth, build_lag_panel
from .spectral import (
    BandwidthConfig,
    FlatTopKernel,
    SpectralEstimate,
    default_bandwidth,
    estimate_spectrum,
)
from .timeseries import FrequencySet, IndexSet, TimePanel, autocov


@dataclass(frozen=True)
class InferenceConfig:
    """Tuning knobs shared by the global test and the multiple-testing batch.

    ``l_n=None`` applies the default bandwidth rule to the pair count;
    ``b_n=None`` uses the data-driven AR(1) plug-in bandwidth.
    """

    B: int = 1000
    seed: int = 0
    c: float = 0.5
    l_n: int | None = None
    b_n: float | None = None
    jitter: float = 1e-10

    def multiplier(self) -> MultiplierConfig:
        return MultiplierConfig(B=self.B, seed=self.seed, jitter=self.jitter)

    def bandwidth_for(self, r: int) -> BandwidthConfig:
        if self.l_n is not None:
            return BandwidthConfig(l_n=self.l_n)
        return default_bandwidth(r)


@dataclass(frozen=True)
class GlobalTestReport:
    """Outcome of one global test."""

    statistic: float
    critical_value: float
    p_value: float
    alpha: float
    reject: bool
    B: int
    arg_max: tuple[int, int, float]
    l_n: int
    c: float
    b_n: float
    seed: int

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["arg_max"] = {"i": self.arg_max[0], "j": self.arg_max[1], "omega": self.arg_max[2]}
        return d


def sup_max_statistic(
    est: SpectralEstimate, pairs: IndexSet, freqs: FrequencySet, n: int, l_n: int
) -> tuple[float, tuple[int, int, float]]:
    """``(n/l_n) * max |f_hat|^2`` with its arg max.

    Ties break to the lowest pair position, then the lowest frequency.
    """
    if pairs.r < 1:
        raise InvalidParameter("empty pair set")
    omegas = freqs.evaluate(n)
    if omegas.size < 1:
        raise InvalidParameter("empty frequency set")
    grid = est.frequencies
    if grid.size != omegas.size or not np.array_equal(grid, omegas):
        raise InvalidParameter("spectral estimate was not evaluated on the requested grid")
    sub = est.matrices[:, pairs.row_indices(), pairs.col_indices()]  # (G, r)
    mags = (sub.real**2 + sub.imag**2).T  # (r, G), pair-major for tie-breaking
    flat = int(np.argmax(mags))
    ell, g = divmod(flat, omegas.size)
    i, j = pairs.pairs[ell]
    return float(n / l_n * mags[ell, g]), (i, j, float(omegas[g]))


def critical_value(draws: BootstrapDraws, alpha: float) -> float:
    """The ``floor(B*alpha)``-th largest bootstrap draw."""
    if not (0.0 < alpha < 1.0):
        raise InvalidParameter(f"alpha must be in (0, 1), got {alpha}")
    b = draws.xi.size
    m = int(np.floor(b * alpha))
    if m < 1:
        raise InvalidParameter(f"floor(B*alpha) = {m} < 1; increase B or alpha")
    return float(np.sort(draws.xi)[b - m])


def p_value_from_draws(draws: BootstrapDraws, statistic: float) -> float:
    """Add-one bootstrap p-value ``(1 + #{xi >= T}) / (B + 1)``."""
    b = draws.xi.size
    return float((1 + int(np.sum(draws.xi >= statistic))) / (b + 1))


def global_test(
    panel: TimePanel,
    pairs: IndexSet,
    freqs: FrequencySet,
    alpha: float = 0.05,
    cfg: InferenceConfig = InferenceConfig(),
    stream_id: int = 0,
) -> GlobalTestReport:
    """Run the full pipeline: estimate, bootstrap, decide.

    ``stream_id`` selects the multiplier substream and defaults to 0, which
    is also hypothesis id 0 of the multiple-testing batch, so a batch of
    size one reproduces this test exactly.
    """
    if not (0.0 < alpha < 1.0):
        raise InvalidParameter(f"alpha must be in (0, 1), got {alpha}")
    pairs.validate_for(panel.p)
    bw = cfg.bandwidth_for(pairs.r)
    kernel = FlatTopKernel(c=cfg.c)
    acov = autocov(panel, bw.l_n)
    est = estimate_spectrum(panel, bw, kernel, freqs, pairs)
    stat, arg_max = sup_max_statistic(est, pairs, freqs, panel.n, bw.l_n)

    lagpanel = build_lag_panel(panel, pairs, bw, acov=acov)
    b_n = cfg.b_n if cfg.b_n is not None else andrews_bandwidth(lagpanel)
    draws = run_bootstrap(lagpanel, freqs, bw, kernel, b_n, cfg.multiplier(), stream_id=stream_id)

    cv = critical_value(draws, alpha)
    pv = p_value_from_draws(draws, stat)
    return GlobalTestReport(
        statistic=stat,
        critical_value=cv,
        p_value=pv,
        alpha=float(alpha),
        reject=bool(stat > cv),
        B=cfg.B,
        arg_max=arg_max,
        l_n=bw.l_n,
        c=cfg.c,
        b_n=float(b_n),
        seed=cfg.seed,
    )
