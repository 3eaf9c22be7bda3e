"""HTTP service exposing the measure, sampling, and experiment operations.

Endpoints mirror the CLI subcommands one to one; the CLI is a thin client
of this app (in process by default).  Core validation errors map to 422,
enumeration-budget refusals to 409.
"""
from __future__ import annotations

import os
from time import perf_counter

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import experiments, measures, seqcore, tailmath
from .measures import BudgetExceededError
from .schemas import (BoundsRequest, BoundsResponse, CollideRequest,
                      CollideResponse, McRequest, McResponse, MeasureRequest,
                      MeasureResponse, OracleRequest, OracleResponse,
                      RecordModel, RkRequest, RkResponse, SampleRequest,
                      SampleResponse, TailsRequest, TailsResponse,
                      WitnessModel)

app = FastAPI(title="crosscorr", version="0.1.0")


@app.exception_handler(BudgetExceededError)
async def _budget_exceeded(request: Request, exc: BudgetExceededError):
    return JSONResponse(status_code=409,
                        content={"error": "budget_exceeded", "detail": str(exc)})


@app.exception_handler(ValueError)
async def _bad_value(request: Request, exc: ValueError):
    return JSONResponse(status_code=422, content={"detail": str(exc)})


def _threads(requested: int) -> int:
    return requested if requested > 0 else (os.cpu_count() or 1)


def _k_range(k, k_min, k_max) -> range:
    if k is not None:
        if k_min is not None or k_max is not None:
            raise ValueError("give either k or a k_min/k_max range")
        return range(k, k + 1)
    if k_min is None or k_max is None:
        raise ValueError("give either k or a k_min/k_max range")
    if k_min > k_max:
        raise ValueError("k_min must not exceed k_max")
    return range(k_min, k_max + 1)


def _parse_sequences(texts: list[str]) -> list[seqcore.BinarySequence]:
    out = []
    for i, text in enumerate(texts):
        try:
            out.append(seqcore.BinarySequence.parse(text))
        except ValueError as exc:
            raise ValueError(f"sequence {i}: {exc}") from None
    return out


def _record(res: measures.MeasureResult, *, n: int, k: int, mode: str,
            cardinality: int, trial: int, seed: int,
            elapsed_ms: float) -> RecordModel:
    band = tailmath.theorem_band(n, k, cardinality, which=mode)
    refs, shifts = res.pattern.flat()
    name = {"family": "phi", "generator": "phi_tilde", "single": "c_k"}[mode]
    return RecordModel(
        n=n, k=k, mode=mode, cardinality=cardinality, measure=name,
        value=res.value, lower=band.lower, upper=band.upper,
        within_band=band.lower < res.value < band.upper,
        approximate=res.approximate,
        witness=WitnessModel(members=list(refs), d=list(shifts),
                             m=res.pattern.m),
        trial=trial, seed=seed, elapsed_ms=elapsed_ms)


@app.get("/healthz")
async def healthz():
    return {"status": "ok"}


@app.post("/measure", response_model=MeasureResponse)
def measure(req: MeasureRequest) -> MeasureResponse:
    seqs = _parse_sequences(req.sequences)
    ks = _k_range(req.k, req.k_min, req.k_max)
    threads = _threads(req.threads)
    records: list[RecordModel] = []
    if req.measure == "c":
        for idx, seq in enumerate(seqs):
            for k in ks:
                t0 = perf_counter()
                try:
                    res = measures.correlation_measure(
                        seq, k, threads=threads, budget=req.budget)
                except BudgetExceededError:
                    if not req.approx:
                        raise
                    fam = seqcore.SequenceFamily(members=(seq,))
                    res = measures.estimate_phi(fam, k, req.trials,
                                                seqcore.stream(req.seed, idx))
                res = measures.MeasureResult(
                    value=res.value, evaluated=res.evaluated,
                    approximate=res.approximate,
                    pattern=measures.ShiftPattern(
                        blocks=tuple((idx, ds) for _, ds in res.pattern.blocks),
                        m=res.pattern.m))
                records.append(_record(
                    res, n=seq.length, k=k, mode="single", cardinality=1,
                    trial=idx, seed=req.seed,
                    elapsed_ms=(perf_counter() - t0) * 1000.0))
        return MeasureResponse(records=records)

    if req.measure == "phi":
        family = seqcore.SequenceFamily(members=tuple(seqs))
        for k in ks:
            t0 = perf_counter()
            try:
                res = measures.phi(family, k, threads=threads,
                                   budget=req.budget)
            except BudgetExceededError:
                if not req.approx:
                    raise
                res = measures.estimate_phi(family, k, req.trials,
                                            seqcore.stream(req.seed, 0))
            records.append(_record(
                res, n=family.length, k=k, mode="family",
                cardinality=family.size, trial=0, seed=req.seed,
                elapsed_ms=(perf_counter() - t0) * 1000.0))
        return MeasureResponse(records=records)

    gen = seqcore.GeneratorSample(seeds=tuple(range(len(seqs))),
                                  images=tuple(seqs))
    for k in ks:
        t0 = perf_counter()
        try:
            res = measures.phi_tilde(gen, k, threads=threads,
                                     budget=req.budget)
        except BudgetExceededError:
            if not req.approx:
                raise
            res = measures.estimate_phi(gen.image_family(), k, req.trials,
                                        seqcore.stream(req.seed, 0))
        records.append(_record(
            res, n=gen.length, k=k, mode="generator",
            cardinality=gen.seed_count, trial=0, seed=req.seed,
            elapsed_ms=(perf_counter() - t0) * 1000.0))
    return MeasureResponse(records=records)


@app.post("/sample", response_model=SampleResponse)
def sample(req: SampleRequest) -> SampleResponse:
    if (req.size is None) == (req.seeds is None):
        raise ValueError("give exactly one of size (family) or seeds "
                         "(generator)")
    rng = seqcore.stream(req.seed, 0)
    if req.size is not None:
        fam = seqcore.sample_family(req.length, req.size, rng)
        return SampleResponse(length=req.length, mode="family",
                              cardinality=fam.size, seed=req.seed,
                              sequences=[s.text() for s in fam])
    gen = seqcore.sample_generator(req.length, req.seeds, rng)
    return SampleResponse(length=req.length, mode="generator",
                          cardinality=gen.seed_count, seed=req.seed,
                          sequences=[s.text() for s in gen.images])


@app.post("/mc", response_model=McResponse)
def mc(req: McRequest) -> McResponse:
    if (req.size is None) == (req.seeds is None):
        raise ValueError("give exactly one of size (family) or seeds "
                         "(generator)")
    ks = _k_range(req.k, req.k_min, req.k_max)
    cfg = experiments.ExperimentConfig(
        length=req.length,
        cardinality=req.size if req.size is not None else req.seeds,
        k_min=ks.start, k_max=ks.stop - 1, trials=req.trials, seed=req.seed,
        mode="family" if req.size is not None else "generator",
        confidence=req.confidence, budget=req.budget, approx=req.approx,
        approx_samples=req.approx_samples, threads=_threads(req.threads))
    records = experiments.run_trials(cfg)
    summary = experiments.summarize(records, confidence=req.confidence)
    return McResponse(
        records=[RecordModel(**experiments.record_to_dict(r))
                 for r in records],
        summary=summary)


@app.post("/bounds", response_model=BoundsResponse)
def bounds(req: BoundsRequest) -> BoundsResponse:
    band = tailmath.theorem_band(req.length, req.k, req.cardinality,
                                 which=req.which)
    return BoundsResponse(lower=band.lower, upper=band.upper, base=band.base,
                          which=band.which, warnings=list(band.warnings))


@app.post("/tails", response_model=TailsResponse)
def tails(req: TailsRequest) -> TailsResponse:
    import math

    if req.mode == "exact":
        if req.n is None or req.t is None:
            raise ValueError("exact mode needs n and t")
        return TailsResponse(
            value=tailmath.binom_tail_exact(req.n, math.ceil(req.t)))
    if req.mode in ("closed", "integral"):
        if req.c is None:
            raise ValueError(f"{req.mode} mode needs c")
        return TailsResponse(value=tailmath.ml_tail(req.c, req.n or 1,
                                                    form=req.mode))
    if req.mode == "hoeffding":
        if req.n is None or req.a is None:
            raise ValueError("hoeffding mode needs n and a")
        return TailsResponse(value=tailmath.hoeffding_bound(req.n, req.a))
    if req.n is None or req.c is None:
        raise ValueError("point mode needs n and c")
    if req.c != int(req.c):
        raise ValueError("point mode needs integer c")
    pb = tailmath.binom_point_lower_bound(req.n, int(req.c))
    return TailsResponse(value=pb.bound,
                         detail={"exact": pb.exact,
                                 "ratio": pb.exact / pb.bound})


@app.post("/rk", response_model=RkResponse)
def rk(req: RkRequest) -> RkResponse:
    res = tailmath.rk_threshold(req.length, req.k, req.seeds)
    return RkResponse(r=res.r, achievable=res.achievable, regime=res.regime,
                      threshold=res.threshold, m=res.m)


@app.post("/oracle", response_model=OracleResponse)
def oracle(req: OracleRequest) -> OracleResponse:
    pmf = experiments.exact_distribution_oracle(req.length, req.size, req.k)
    if req.trials is None:
        return OracleResponse(pmf=pmf)
    cfg = experiments.ExperimentConfig(
        length=req.length, cardinality=req.size, k_min=req.k, k_max=req.k,
        trials=req.trials, seed=req.seed, mode="family")
    records = experiments.run_trials(cfg)
    counts: dict[int, int] = {}
    for rec in records:
        counts[rec.value] = counts.get(rec.value, 0) + 1
    empirical = {v: counts[v] / req.trials for v in sorted(counts)}
    return OracleResponse(pmf=pmf, empirical=empirical,
                          tv=experiments.tv_distance(pmf, empirical))


@app.post("/collide", response_model=CollideResponse)
def collide(req: CollideRequest) -> CollideResponse:
    rep = experiments.collision_experiment(req.length, req.seeds, req.trials,
                                           req.seed)
    return CollideResponse(length=rep.length, seeds=rep.seed_count,
                           trials=rep.trials, seed=rep.seed,
                           formula=rep.formula, empirical=rep.empirical)


def serve(argv: list[str] | None = None) -> None:
    """Run the service under uvicorn."""
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(prog="crosscorr-serve")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    args = parser.parse_args(argv)
    uvicorn.run(app, host=args.host, port=args.port)
