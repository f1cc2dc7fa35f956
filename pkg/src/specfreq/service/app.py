"""FastAPI service wrapping the inference pipeline.

Domain validation failures surface as HTTP 400 with the error text;
malformed request bodies are handled by FastAPI's own 422 responses.
"""

from __future__ import annotations

import math

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from scipy.special import ndtri

from .. import __version__
from ..errors import InvalidParameter, SpecfreqError
from ..fdr import HypothesisSpec, fdr_procedure, marginal_pvalues, normal_quantiles
from ..simulate import DgpSpec, run_fdr_experiment, run_size_experiment
from ..spectral import BandwidthConfig, FlatTopKernel, default_bandwidth, estimate_spectrum
from ..testing import InferenceConfig, global_test
from ..timeseries import FrequencySet, IndexSet, TimePanel, difference, parse_csv
from .schemas import (
    ArgMax,
    EstimateRequest,
    EstimateResponse,
    FdrRequest,
    FdrResponse,
    FdrRow,
    FreqsSpec,
    HealthResponse,
    PairsSpec,
    PanelPayload,
    PvalueMatrix,
    SimulateRequest,
    SimulateResponse,
    SpectrumRow,
    TestRequest,
    TestResponse,
)


def build_panel(payload: PanelPayload, diff) -> TimePanel:
    if payload.csv is not None:
        panel = parse_csv(payload.csv, has_header=payload.has_header)
    else:
        import numpy as np

        values = np.asarray(payload.values, dtype=float)
        if values.ndim != 2:
            raise InvalidParameter("'values' must be a rectangular matrix")
        labels = payload.labels or [f"s{j + 1}" for j in range(values.shape[1])]
        panel = TimePanel(values=values, labels=tuple(labels))
    if diff is not None:
        panel = difference(panel, diff.kind, diff.period)
    return panel


def build_freqs(spec: FreqsSpec) -> FrequencySet:
    if spec.preset == "quarterly":
        return FrequencySet.quarterly()
    if spec.preset == "monthly":
        return FrequencySet.monthly()
    if spec.values is not None:
        return FrequencySet.discrete(sorted(spec.values))
    lo, hi = spec.interval
    return FrequencySet.from_interval(lo, hi, grid_points=spec.grid_points)


def block_members(labels: tuple[str, ...], separator: str) -> dict[str, list[int]]:
    """Group 1-based series indices by their label prefix, in first-seen order."""
    members: dict[str, list[int]] = {}
    for idx, label in enumerate(labels, start=1):
        members.setdefault(label.split(separator)[0], []).append(idx)
    return members


def select_pairs(spec: PairsSpec, panel: TimePanel) -> IndexSet:
    """The single pair set a global test runs on."""
    if spec.mode == "all":
        return IndexSet.all_offdiagonal(panel.p)
    if spec.mode == "diagonal":
        return IndexSet.diagonal(panel.p)
    if spec.mode == "explicit":
        pairs = IndexSet(tuple((i, j) for i, j in spec.pairs))
        pairs.validate_for(panel.p)
        return pairs
    members = block_members(panel.labels, spec.separator)
    if len(members) < 2:
        raise InvalidParameter("blocks mode needs at least two label prefixes")
    groups = list(members.values())
    pairs = []
    for a in range(1, len(groups)):
        for b in range(a):
            pairs.extend((i, j) for i in groups[a] for j in groups[b])
    return IndexSet(tuple(pairs))


def fdr_hypotheses(
    spec: PairsSpec, panel: TimePanel, freqs: FrequencySet
) -> tuple[list[HypothesisSpec], list[tuple[str, str]], list[str] | None]:
    """One hypothesis per pair (or per block pair), plus display labels."""
    if spec.mode == "all":
        pair_list = [(i, j) for i in range(1, panel.p + 1) for j in range(i + 1, panel.p + 1)]
        hyps = [
            HypothesisSpec(id=q, pairs=IndexSet(((i, j),)), freqs=freqs)
            for q, (i, j) in enumerate(pair_list)
        ]
        names = [(panel.labels[i - 1], panel.labels[j - 1]) for i, j in pair_list]
        return hyps, names, None
    if spec.mode == "diagonal":
        hyps = [
            HypothesisSpec(id=q, pairs=IndexSet(((i, i),)), freqs=freqs)
            for q, i in enumerate(range(1, panel.p + 1))
        ]
        names = [(label, label) for label in panel.labels]
        return hyps, names, None
    if spec.mode == "explicit":
        hyps = [
            HypothesisSpec(id=q, pairs=IndexSet(((i, j),)), freqs=freqs)
            for q, (i, j) in enumerate(spec.pairs)
        ]
        for hyp in hyps:
            hyp.pairs.validate_for(panel.p)
        names = [(panel.labels[i - 1], panel.labels[j - 1]) for i, j in spec.pairs]
        return hyps, names, None
    members = block_members(panel.labels, spec.separator)
    if len(members) < 2:
        raise InvalidParameter("blocks mode needs at least two label prefixes")
    block_labels = list(members)
    hyps = []
    names = []
    q = 0
    for a in range(len(block_labels)):
        for b in range(a + 1, len(block_labels)):
            rows = members[block_labels[a]]
            cols = members[block_labels[b]]
            hyps.append(HypothesisSpec(id=q, pairs=IndexSet.block(rows, cols), freqs=freqs))
            names.append((block_labels[a], block_labels[b]))
            q += 1
    return hyps, names, block_labels


def create_app() -> FastAPI:
    app = FastAPI(
        title="specfreq",
        version=__version__,
        description="Cross-spectrum inference for high-dimensional stationary time series",
    )

    @app.exception_handler(SpecfreqError)
    async def domain_error(_, exc: SpecfreqError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(version=__version__)

    @app.post("/v1/estimate", response_model=EstimateResponse, response_model_by_alias=True)
    def estimate(req: EstimateRequest):
        panel = build_panel(req.panel, req.difference)
        freqs = build_freqs(req.freqs)
        bw = BandwidthConfig(req.l_n) if req.l_n is not None else default_bandwidth(
            max(panel.p * (panel.p - 1) // 2, 1)
        )
        est = estimate_spectrum(panel, bw, FlatTopKernel(req.c), freqs)
        rows = [SpectrumRow(omega=w, i=i, j=j, re=re, im=im) for w, i, j, re, im in est.to_rows()]
        return EstimateResponse(labels=list(panel.labels), l_n=bw.l_n, c=req.c, n=panel.n, rows=rows)

    @app.post("/v1/test", response_model=TestResponse, response_model_by_alias=True)
    def run_test(req: TestRequest):
        panel = build_panel(req.panel, req.difference)
        pairs = select_pairs(req.pairs, panel)
        freqs = build_freqs(req.freqs)
        cfg = InferenceConfig(B=req.B, seed=req.seed, c=req.c, l_n=req.l_n, b_n=req.b_n)
        report = global_test(panel, pairs, freqs, alpha=req.alpha, cfg=cfg)
        i, j, omega = report.arg_max
        return TestResponse(
            statistic=report.statistic,
            critical_value=report.critical_value,
            p_value=report.p_value,
            alpha=report.alpha,
            reject=report.reject,
            B=report.B,
            l_n=report.l_n,
            c=report.c,
            b_n=report.b_n,
            seed=report.seed,
            arg_max=ArgMax(
                i=i, j=j, label_i=panel.labels[i - 1], label_j=panel.labels[j - 1], omega=omega
            ),
        )

    @app.post("/v1/fdr", response_model=FdrResponse, response_model_by_alias=True)
    def run_fdr(req: FdrRequest):
        panel = build_panel(req.panel, req.difference)
        freqs = build_freqs(req.freqs)
        cfg = InferenceConfig(B=req.B, seed=req.seed, c=req.c, l_n=req.l_n, b_n=req.b_n)
        hyps, names, block_labels = fdr_hypotheses(req.pairs, panel, freqs)
        if len(hyps) >= 2:
            report = fdr_procedure(panel, hyps, alpha=req.alpha, cfg=cfg)
            results, v_values = report.results, report.v_values
            t_hat, fallback, rejected = report.t_hat, report.fallback_used, report.rejected
        else:
            # a single hypothesis has no step-up search: fall back to the
            # plain level-alpha decision, whose threshold on the normal
            # quantile scale is Phi^{-1}(1 - alpha)
            results = marginal_pvalues(panel, hyps, cfg)
            v_values = normal_quantiles([res.p_value for res in results], cfg.B)
            t_hat = float(ndtri(1.0 - req.alpha))
            fallback = False
            rejected = {res.hypothesis.id for res, v in zip(results, v_values) if v >= t_hat}
        rows = [
            FdrRow(
                q=res.hypothesis.id,
                label_i=names[k][0],
                label_j=names[k][1],
                statistic=res.statistic,
                p_value=res.p_value,
                v=float(v_values[k]),
                rejected=res.hypothesis.id in rejected,
                star=res.hypothesis.id not in rejected,
            )
            for k, res in enumerate(results)
        ]
        matrix = None
        if block_labels is not None:
            size = len(block_labels)
            pv: list[list[float | None]] = [[None] * size for _ in range(size)]
            stars: list[list[bool | None]] = [[None] * size for _ in range(size)]
            for row, (name_i, name_j) in zip(rows, names):
                a, b = block_labels.index(name_i), block_labels.index(name_j)
                pv[a][b] = pv[b][a] = row.p_value
                stars[a][b] = stars[b][a] = row.star
            matrix = PvalueMatrix(labels=block_labels, p_values=pv, stars=stars)
        return FdrResponse(
            alpha=req.alpha,
            Q=len(hyps),
            t_hat=float(t_hat),
            fallback_used=fallback,
            B=req.B,
            l_n=req.l_n,
            c=req.c,
            seed=req.seed,
            rows=rows,
            matrix=matrix,
        )

    @app.post("/v1/simulate", response_model=SimulateResponse, response_model_by_alias=True)
    def run_simulation(req: SimulateRequest):
        spec = DgpSpec(model=req.model, n=req.n, p=req.p, param=req.param, burn_in=req.burn_in)
        cfg = InferenceConfig(B=req.B, seed=req.seed, c=req.c, l_n=req.l_n, b_n=req.b_n)
        freqs = build_freqs(req.freqs)
        if req.experiment == "fdr":
            if freqs.is_interval:
                raise InvalidParameter("the fdr experiment needs a discrete frequency set")
            result = run_fdr_experiment(
                spec,
                req.reps,
                freqs=list(freqs.frequencies),
                blocks=req.blocks,
                alpha=req.alpha,
                cfg=cfg,
                workers=req.workers,
            )
        else:
            result = run_size_experiment(
                spec, req.reps, freqs=freqs, alpha=req.alpha, cfg=cfg, workers=req.workers
            )
        return SimulateResponse(
            experiment=req.experiment,
            replications=result.replications,
            rejection_rate=result.rejection_rate,
            fdr=result.fdr,
            power=result.power,
            config=result.config,
        )

    return app


app = create_app()
