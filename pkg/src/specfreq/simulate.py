"""Benchmark data-generating processes and Monte-Carlo experiment runners.

Six stationary Gaussian designs are provided, in two families:

* scalar dynamics (``m1`` white noise, ``m2`` VAR(1), ``m3`` VMA(1)) whose
  cross-spectra vanish off the diagonal, used for size studies;
* tridiagonal-loading dynamics (``m4`` instantaneous, ``m5`` VAR(1),
  ``m6`` VMA(1)) with banded nonzero cross-spectra, used for power and
  FDR studies.

Each model has a closed-form spectral density used as the ground truth
when partitioning hypotheses into nulls and alternatives.

Replications are independent: replication ``v`` derives its own root seed
from ``(seed, v)``, so runs are reproducible regardless of how they are
scheduled, and experiment totals are order-free sums of integer counts.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .errors import InvalidParameter
from .fdr import HypothesisSpec, fdr_procedure
from .rng import STREAM_PANEL, as_generator, replication_seed, substream
from .testing import InferenceConfig, global_test
from .timeseries import FrequencySet, IndexSet, TimePanel, default_labels

MODELS = ("m1", "m2", "m3", "m4", "m5", "m6")

TRUTH_TOL = 1e-12
SERIES_TOL = 1e-14


@dataclass(frozen=True)
class DgpSpec:
    """A data-generating process: model name, dimensions, and parameter."""

    model: str
    n: int
    p: int
    param: float
    burn_in: int = 200

    def __post_init__(self):
        if self.model not in MODELS:
            raise InvalidParameter(f"unknown model {self.model!r}; choose from {MODELS}")
        if self.n < 3 or self.p < 1:
            raise InvalidParameter("need n >= 3 and p >= 1")
        if self.burn_in < 0:
            raise InvalidParameter("burn_in must be non-negative")
        if self.model == "m2" and not abs(self.param) < 1.0:
            raise InvalidParameter(f"m2 needs |a| < 1, got {self.param}")
        if self.model == "m5":
            rad = _spectral_radius(_tridiag(self.p, self.param))
            if not rad < 1.0:
                raise InvalidParameter(f"m5 loading has spectral radius {rad:.4f} >= 1")


def _tridiag(p: int, off: float) -> np.ndarray:
    psi = 0.4 * np.eye(p)
    idx = np.arange(p - 1)
    psi[idx, idx + 1] = off
    psi[idx + 1, idx] = off
    return psi


def _spectral_radius(a: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvalsh(a))))


def simulate(spec: DgpSpec, rng: np.random.Generator | int) -> TimePanel:
    """Draw one panel from ``spec``; recursive models discard ``burn_in`` steps."""
    rng = as_generator(rng)
    n, p, a = spec.n, spec.p, spec.param
    if spec.model == "m1":
        x = a * rng.standard_normal((n, p))
    elif spec.model == "m2":
        eps = math.sqrt(1.0 - a * a) * rng.standard_normal((spec.burn_in + n, p))
        x = _var1_filter(eps, lambda prev: a * prev)[spec.burn_in :]
    elif spec.model == "m3":
        eps = rng.standard_normal((n + 1, p))
        x = eps[1:] - a * eps[:-1]
    elif spec.model == "m4":
        x = rng.standard_normal((n, p)) @ _tridiag(p, a).T
    elif spec.model == "m5":
        psi = _tridiag(p, a)
        eps = math.sqrt(1.0 - 0.16) * rng.standard_normal((spec.burn_in + n, p))
        x = _var1_filter(eps, lambda prev: prev @ psi.T)[spec.burn_in :]
    else:  # m6
        psi = _tridiag(p, a)
        eps = rng.standard_normal((n + 1, p))
        x = eps[1:] - eps[:-1] @ psi.T
    return TimePanel(values=x, labels=default_labels(p))


def _var1_filter(eps: np.ndarray, propagate) -> np.ndarray:
    x = np.empty_like(eps)
    prev = np.zeros(eps.shape[1])
    for t in range(eps.shape[0]):
        prev = propagate(prev) + eps[t]
        x[t] = prev
    return x


def true_spectrum(spec: DgpSpec, omega: float) -> np.ndarray:
    """Closed-form spectral density matrix of ``spec`` at ``omega``."""
    p, a = spec.p, spec.param
    two_pi = 2.0 * math.pi
    eye = np.eye(p)
    if spec.model == "m1":
        return (a * a / two_pi) * eye.astype(np.complex128)
    if spec.model == "m2":
        scale = (1.0 - a * a) / (two_pi * (1.0 + a * a - 2.0 * a * math.cos(omega)))
        return scale * eye.astype(np.complex128)
    if spec.model == "m3":
        return ((1.0 + a * a - 2.0 * a * math.cos(omega)) / two_pi) * eye.astype(np.complex128)
    psi = _tridiag(p, a)
    if spec.model == "m4":
        return (psi @ psi / two_pi).astype(np.complex128)
    if spec.model == "m6":
        return ((eye + psi @ psi - 2.0 * math.cos(omega) * psi) / two_pi).astype(np.complex128)
    # m5: 0.84/(2 pi) * (sum_j Psi^{2j}) * (sum_k Psi^{|k|} e^{-i k omega});
    # both geometric series truncated once terms fall below SERIES_TOL.
    even_sum = np.zeros((p, p))
    term = np.eye(p)
    psi2 = psi @ psi
    while np.abs(term).max() >= SERIES_TOL:
        even_sum += term
        term = term @ psi2
    lag_sum = np.eye(p, dtype=np.complex128)
    power = np.eye(p)
    k = 1
    while True:
        power = power @ psi
        if np.abs(power).max() < SERIES_TOL:
            break
        lag_sum += (2.0 * math.cos(k * omega)) * power
        k += 1
    return (0.84 / two_pi) * even_sum @ lag_sum


@dataclass(frozen=True)
class ExperimentResult:
    """Aggregated Monte-Carlo rates with the configuration that produced them."""

    replications: int
    rejection_rate: float | None = None
    fdr: float | None = None
    power: float | None = None
    config: dict[str, Any] = field(default_factory=dict)


def _echo(spec: DgpSpec, cfg: InferenceConfig, alpha: float, freqs: FrequencySet) -> dict[str, Any]:
    return {
        "model": spec.model,
        "n": spec.n,
        "p": spec.p,
        "param": spec.param,
        "K": "interval" if freqs.is_interval else freqs.m_j(spec.n),
        "alpha": alpha,
        "B": cfg.B,
        "c": cfg.c,
        "seed": cfg.seed,
    }


def _size_rep(args) -> int:
    spec, freqs, pairs, alpha, cfg, v = args
    rep_seed = replication_seed(cfg.seed, v)
    panel = simulate(spec, substream(rep_seed, STREAM_PANEL))
    report = global_test(panel, pairs, freqs, alpha=alpha, cfg=replace(cfg, seed=rep_seed))
    return int(report.reject)


def _run_reps(worker, arglist, workers: int):
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(worker, arglist, chunksize=1))
    return [worker(args) for args in arglist]


def run_size_experiment(
    spec: DgpSpec,
    reps: int,
    freqs: FrequencySet | None = None,
    pairs: IndexSet | None = None,
    alpha: float = 0.05,
    cfg: InferenceConfig = InferenceConfig(),
    workers: int = 1,
) -> ExperimentResult:
    """Rejection rate of the global test across simulated replications.

    Defaults: all off-diagonal pairs and the quarterly frequency preset.
    The same runner serves size studies (null models) and power studies
    (alternative models); only the truth of the design differs.
    """
    if reps < 1:
        raise InvalidParameter(f"need at least one replication, got {reps}")
    if freqs is None:
        freqs = FrequencySet.quarterly()
    if pairs is None:
        pairs = IndexSet.all_offdiagonal(spec.p)
    flags = _run_reps(_size_rep, [(spec, freqs, pairs, alpha, cfg, v) for v in range(reps)], workers)
    return ExperimentResult(
        replications=reps,
        rejection_rate=sum(flags) / reps,
        config=_echo(spec, cfg, alpha, freqs),
    )


run_power_experiment = run_size_experiment


def block_hypotheses(p: int, freqs: list[float], blocks: int = 10) -> list[HypothesisSpec]:
    """Block-design batch: split ``[p]`` into equal blocks and test every
    block pair (including each block with itself) at each single frequency."""
    if p % blocks != 0:
        raise InvalidParameter(f"p={p} is not divisible into {blocks} blocks")
    size = p // blocks
    members = [list(range(b * size + 1, (b + 1) * size + 1)) for b in range(blocks)]
    hyps = []
    hid = 0
    for bi in range(blocks):
        for bj in range(bi, blocks):
            for w in freqs:
                hyps.append(
                    HypothesisSpec(
                        id=hid,
                        pairs=IndexSet.block(members[bi], members[bj]),
                        freqs=FrequencySet.discrete([w]),
                    )
                )
                hid += 1
    return hyps


def null_partition(spec: DgpSpec, hyps: list[HypothesisSpec]) -> set[int]:
    """Ids of the hypotheses that are true nulls under ``spec``'s spectrum."""
    truth_cache: dict[float, np.ndarray] = {}
    nulls = set()
    for hyp in hyps:
        rows = hyp.pairs.row_indices()
        cols = hyp.pairs.col_indices()
        sup = 0.0
        for w in hyp.freqs.evaluate(spec.n):
            w = float(w)
            if w not in truth_cache:
                truth_cache[w] = true_spectrum(spec, w)
            sup = max(sup, float(np.abs(truth_cache[w][rows, cols]).max()))
        if sup < TRUTH_TOL:
            nulls.add(hyp.id)
    return nulls


def _fdr_rep(args) -> tuple[float, float]:
    spec, hyps, nulls, n_alt, alpha, cfg, v = args
    rep_seed = replication_seed(cfg.seed, v)
    panel = simulate(spec, substream(rep_seed, STREAM_PANEL))
    report = fdr_procedure(panel, hyps, alpha=alpha, cfg=replace(cfg, seed=rep_seed))
    false_pos = len(report.rejected & nulls)
    fdp = false_pos / max(1, len(report.rejected))
    power = (len(report.rejected) - false_pos) / n_alt if n_alt else 0.0
    return fdp, power


def run_fdr_experiment(
    spec: DgpSpec,
    reps: int,
    freqs: list[float] | None = None,
    blocks: int = 10,
    alpha: float = 0.05,
    cfg: InferenceConfig = InferenceConfig(),
    workers: int = 1,
) -> ExperimentResult:
    """Empirical FDR and power of the block-design multiple-testing batch.

    FDR is the mean false-discovery proportion across replications; power
    is the mean fraction of true alternatives rejected.
    """
    if reps < 1:
        raise InvalidParameter(f"need at least one replication, got {reps}")
    if freqs is None:
        freqs = list(FrequencySet.quarterly().frequencies)
    hyps = block_hypotheses(spec.p, freqs, blocks=blocks)
    nulls = null_partition(spec, hyps)
    n_alt = len(hyps) - len(nulls)
    outcomes = _run_reps(
        _fdr_rep, [(spec, hyps, nulls, n_alt, alpha, cfg, v) for v in range(reps)], workers
    )
    fdr = sum(o[0] for o in outcomes) / reps
    power = sum(o[1] for o in outcomes) / reps if n_alt else None
    return ExperimentResult(
        replications=reps,
        fdr=fdr,
        power=power,
        config={
            **_echo(spec, cfg, alpha, FrequencySet.discrete(freqs)),
            "Q": len(hyps),
            "Q0": len(nulls),
            "blocks": blocks,
        },
    )
