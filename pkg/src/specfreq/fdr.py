"""Simultaneous testing with false-discovery-rate control.

Each hypothesis owns a pair set and a frequency set; the batch computes a
bootstrap p-value per hypothesis (each from its own lag-product panel,
plug-in bandwidth, and independent multiplier stream keyed by the
hypothesis id), transforms them to normal quantiles
``V = Phi^{-1}(1 - pv)``, and rejects every hypothesis with ``V >= t_hat``.

The threshold is the smallest ``t`` in ``(0, sqrt(2 log Q - 2 log log Q)]``
with estimated false-discovery proportion

    FDP(t) = Q * (1 - Phi(t)) / max(1, #{q : V_q >= t})

at most ``alpha``; if no such ``t`` exists, the conservative fallback
``t_hat = sqrt(2 log Q)`` applies.  Because FDP only jumps at the observed
``V`` values and decreases between jumps, it suffices to scan the sorted
positive ``V`` values (plus the upper search bound itself).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

from .bootstrap import run_bootstrap
from .errors import HypothesisBatchError, InvalidParameter, SpecfreqError
from .longrun import andrews_bandwidth, build_lag_panel
from .spectral import FlatTopKernel, SpectralEstimate, spectrum_from_autocov
from .testing import InferenceConfig, p_value_from_draws, sup_max_statistic
from .timeseries import AutocovSet, FrequencySet, IndexSet, TimePanel, autocov


@dataclass(frozen=True)
class HypothesisSpec:
    """One marginal hypothesis: zero cross-spectrum on ``pairs`` over ``freqs``.

    ``id`` keys the multiplier substream, so a hypothesis keeps its p-value
    when the batch is reordered.
    """

    id: int
    pairs: IndexSet
    freqs: FrequencySet

    def __post_init__(self):
        if self.id < 0:
            raise InvalidParameter("hypothesis id must be non-negative")


@dataclass(frozen=True)
class MarginalResult:
    hypothesis: HypothesisSpec
    statistic: float
    p_value: float


@dataclass(frozen=True)
class FdrReport:
    """Batch outcome: per-hypothesis statistics and the step-up decision."""

    results: tuple[MarginalResult, ...]
    v_values: np.ndarray
    t_hat: float
    rejected: frozenset[int]
    alpha: float
    fallback_used: bool


def marginal_pvalues(
    panel: TimePanel, hyps: list[HypothesisSpec], cfg: InferenceConfig = InferenceConfig()
) -> list[MarginalResult]:
    """Statistics and add-one bootstrap p-values for each hypothesis.

    Spectral estimates are shared across hypotheses that resolve to the
    same lag-window bandwidth; lag-product panels, plug-in bandwidths and
    multiplier streams are per-hypothesis.  The first failing hypothesis
    aborts the batch, tagged with its id.
    """
    if not hyps:
        raise InvalidParameter("empty hypothesis batch")
    ids = [h.id for h in hyps]
    if len(set(ids)) != len(ids):
        raise InvalidParameter("hypothesis ids must be unique")
    kernel = FlatTopKernel(c=cfg.c)
    acov_cache: dict[int, AutocovSet] = {}
    est_cache: dict[tuple[int, FrequencySet], SpectralEstimate] = {}
    out = []
    for hyp in hyps:
        try:
            hyp.pairs.validate_for(panel.p)
            bw = cfg.bandwidth_for(hyp.pairs.r)
            if bw.l_n not in acov_cache:
                acov_cache[bw.l_n] = autocov(panel, bw.l_n)
            acov = acov_cache[bw.l_n]
            key = (bw.l_n, hyp.freqs)
            if key not in est_cache:
                omegas = hyp.freqs.evaluate(panel.n)
                est_cache[key] = SpectralEstimate(
                    frequencies=omegas,
                    matrices=spectrum_from_autocov(acov, bw, kernel, omegas),
                    l_n=bw.l_n,
                    c=kernel.c,
                    n=panel.n,
                )
            est = est_cache[key]
            stat, _ = sup_max_statistic(est, hyp.pairs, hyp.freqs, panel.n, bw.l_n)
            lagpanel = build_lag_panel(panel, hyp.pairs, bw, acov=acov)
            b_n = cfg.b_n if cfg.b_n is not None else andrews_bandwidth(lagpanel)
            draws = run_bootstrap(
                lagpanel, hyp.freqs, bw, kernel, b_n, cfg.multiplier(), stream_id=hyp.id
            )
            out.append(
                MarginalResult(hypothesis=hyp, statistic=stat, p_value=p_value_from_draws(draws, stat))
            )
        except SpecfreqError as err:
            raise HypothesisBatchError(hyp.id, str(err)) from err
    return out


def normal_quantiles(p_values: np.ndarray, B: int) -> np.ndarray:
    """``V = Phi^{-1}(1 - pv)`` with pv clamped to ``[1/(B+1), B/(B+1)]``."""
    pv = np.clip(np.asarray(p_values, dtype=np.float64), 1.0 / (B + 1), B / (B + 1))
    return ndtri(1.0 - pv)


def fdp_hat(t: float, q_total: int, v_values: np.ndarray) -> float:
    """Estimated false discovery proportion at threshold ``t > 0``."""
    if t <= 0.0:
        raise InvalidParameter(f"threshold t must be positive, got {t}")
    r = int(np.sum(np.asarray(v_values) >= t))
    return float(q_total * (1.0 - ndtr(t)) / max(1, r))


def select_threshold(v_values: np.ndarray, q_total: int, alpha: float) -> tuple[float, bool]:
    """Step-up threshold search; returns ``(t_hat, fallback_used)``."""
    if q_total < 2:
        raise InvalidParameter(f"threshold search needs Q >= 2, got {q_total}")
    if not (0.0 < alpha < 1.0):
        raise InvalidParameter(f"alpha must be in (0, 1), got {alpha}")
    v = np.asarray(v_values, dtype=np.float64)
    t_max = math.sqrt(2.0 * math.log(q_total) - 2.0 * math.log(math.log(q_total)))
    candidates = np.unique(v[(v > 0.0) & (v <= t_max)])
    # The search bound itself closes the last constant stretch of R(t).
    candidates = np.append(candidates, t_max)
    for t in candidates:
        if fdp_hat(float(t), q_total, v) <= alpha:
            return float(t), False
    return math.sqrt(2.0 * math.log(q_total)), True


def fdr_procedure(
    panel: TimePanel,
    hyps: list[HypothesisSpec],
    alpha: float = 0.05,
    cfg: InferenceConfig = InferenceConfig(),
) -> FdrReport:
    """Run the batch and reject every hypothesis with ``V >= t_hat``."""
    results = marginal_pvalues(panel, hyps, cfg)
    pv = np.array([res.p_value for res in results])
    v = normal_quantiles(pv, cfg.B)
    t_hat, fallback = select_threshold(v, len(hyps), alpha)
    rejected = frozenset(res.hypothesis.id for res, vq in zip(results, v) if vq >= t_hat)
    return FdrReport(
        results=tuple(results),
        v_values=v,
        t_hat=t_hat,
        rejected=rejected,
        alpha=float(alpha),
        fallback_used=fallback,
    )
