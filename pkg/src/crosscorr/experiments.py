"""Monte Carlo experiments over random families/generators, with exact
small-case distribution oracles and canonical JSON Lines records.

One record per (trial, k).  Field order is fixed; floats are serialized
with 17 significant digits so equal values always produce equal bytes.
Record files are append-only; reruns should target fresh files.
"""
from __future__ import annotations

import itertools
import json
import math
import os
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from time import perf_counter

import numpy as np

from .seqcore import (BinarySequence, GeneratorSample, SequenceFamily,
                      sample_family, sample_generator, stream)
from .measures import (DEFAULT_BUDGET, BudgetExceededError, MeasureResult,
                       estimate_phi, phi, phi_tilde)
from .tailmath import theorem_band

RECORD_FIELDS = ("n", "k", "mode", "cardinality", "measure", "value", "lower",
                 "upper", "within_band", "approximate", "witness", "trial",
                 "seed", "elapsed_ms")

_MEASURE_NAME = {"family": "phi", "generator": "phi_tilde", "single": "c_k"}
_UPPER_COEFF = {"family": 2.5, "generator": 2.5, "single": 1.75}


@dataclass(frozen=True)
class BoundsRecord:
    n: int
    k: int
    mode: str
    cardinality: int
    measure: str
    value: int
    lower: float
    upper: float
    within_band: bool
    approximate: bool
    witness: dict
    trial: int
    seed: int
    elapsed_ms: float


@dataclass(frozen=True)
class ExperimentConfig:
    length: int
    cardinality: int
    k_min: int
    k_max: int
    trials: int
    seed: int
    mode: str = "family"
    confidence: float = 0.05
    budget: int | None = DEFAULT_BUDGET
    approx: bool = False
    approx_samples: int = 100_000
    threads: int = 1

    def __post_init__(self) -> None:
        if self.length < 2:
            raise ValueError("length must be at least 2")
        if self.cardinality < 1:
            raise ValueError("cardinality must be at least 1")
        if not (2 <= self.k_min <= self.k_max <= self.length):
            raise ValueError("need 2 <= k_min <= k_max <= length")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not (0 <= self.seed <= 2**64 - 1):
            raise ValueError("seed must fit in 64 bits")
        if self.mode not in ("family", "generator"):
            raise ValueError("mode must be 'family' or 'generator'")
        if not (0.0 < self.confidence < 1.0):
            raise ValueError("confidence must lie in (0, 1)")
        if self.budget is not None and self.budget < 1:
            raise ValueError("budget must be positive")
        if self.approx_samples < 1:
            raise ValueError("approx_samples must be at least 1")
        if self.threads < 0:
            raise ValueError("threads must be nonnegative")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError("records must hold finite numbers")
        return format(value, ".17g")
    if isinstance(value, str):
        return json.dumps(value)
    raise TypeError(f"unsupported record value {value!r}")


def _fmt_witness(w: dict) -> str:
    members = ",".join(str(int(x)) for x in w["members"])
    d = ",".join(str(int(x)) for x in w["d"])
    return '{"members":[%s],"d":[%s],"m":%d}' % (members, d, int(w["m"]))


def record_to_dict(rec: BoundsRecord) -> dict:
    return {f: getattr(rec, f) for f in RECORD_FIELDS}


def format_record(rec, elapsed_ms: float | None = None) -> str:
    """Canonical one-line JSON for a record (dataclass or plain dict)."""
    obj = record_to_dict(rec) if isinstance(rec, BoundsRecord) else rec
    parts = []
    for name in RECORD_FIELDS:
        val = obj[name]
        if name == "witness":
            body = _fmt_witness(val)
        elif name == "elapsed_ms" and elapsed_ms is not None:
            body = _fmt(float(elapsed_ms))
        else:
            body = _fmt(val)
        parts.append(f'"{name}":{body}')
    return "{" + ",".join(parts) + "}"


def write_records(path: str | os.PathLike, records, append: bool = True) -> None:
    mode = "a" if append else "x"
    with open(path, mode, encoding="utf-8") as fh:
        for rec in records:
            fh.write(format_record(rec))
            fh.write("\n")


def read_records(path: str | os.PathLike) -> list[dict]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


def _witness_dict(res: MeasureResult) -> dict:
    refs, shifts = res.pattern.flat()
    return {"members": list(refs), "d": list(shifts), "m": res.pattern.m}


def _measure_for_trial(cfg: ExperimentConfig, sample, k: int) -> MeasureResult:
    if cfg.mode == "family":
        family, rng = sample
        try:
            return phi(family, k, threads=1, budget=cfg.budget)
        except BudgetExceededError:
            if not cfg.approx:
                raise
            return estimate_phi(family, k, cfg.approx_samples, rng)
    generator, rng = sample
    try:
        return phi_tilde(generator, k, threads=1, budget=cfg.budget)
    except BudgetExceededError:
        if not cfg.approx:
            raise
        # sampled generators use seeds 0..count-1, matching family indices
        return estimate_phi(generator.image_family(), k, cfg.approx_samples, rng)


def _run_one_trial(cfg: ExperimentConfig, trial: int) -> list[BoundsRecord]:
    rng = stream(cfg.seed, trial)
    if cfg.mode == "family":
        sample = (sample_family(cfg.length, cfg.cardinality, rng), rng)
    else:
        sample = (sample_generator(cfg.length, cfg.cardinality, rng), rng)
    records = []
    for k in range(cfg.k_min, cfg.k_max + 1):
        t0 = perf_counter()
        res = _measure_for_trial(cfg, sample, k)
        band = theorem_band(cfg.length, k, cfg.cardinality, which=cfg.mode)
        elapsed = (perf_counter() - t0) * 1000.0
        records.append(BoundsRecord(
            n=cfg.length, k=k, mode=cfg.mode, cardinality=cfg.cardinality,
            measure=_MEASURE_NAME[cfg.mode], value=res.value,
            lower=band.lower, upper=band.upper,
            within_band=band.lower < res.value < band.upper,
            approximate=res.approximate, witness=_witness_dict(res),
            trial=trial, seed=cfg.seed, elapsed_ms=elapsed))
    return records


def run_trials(cfg: ExperimentConfig) -> list[BoundsRecord]:
    """All (trial, k) records, ordered by trial then k.  Trials run on
    independent (seed, trial) streams, so results do not depend on worker
    count or completion order."""
    workers = cfg.threads if cfg.threads > 0 else (os.cpu_count() or 1)
    if workers <= 1 or cfg.trials == 1:
        batches = [_run_one_trial(cfg, t) for t in range(cfg.trials)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(lambda t: _run_one_trial(cfg, t),
                                    range(cfg.trials)))
    return [rec for batch in batches for rec in batch]


def summarize(records, confidence: float | None = None) -> dict:
    """Per-(n, mode, cardinality, k) aggregates of a record list."""
    dicts = [record_to_dict(r) if isinstance(r, BoundsRecord) else r
             for r in records]
    if not dicts:
        raise ValueError("no records to summarize")
    groups: dict[tuple, list[dict]] = {}
    for rec in dicts:
        groups.setdefault((rec["n"], rec["mode"], rec["cardinality"],
                           rec["k"]), []).append(rec)
    out = []
    for key in sorted(groups):
        n, mode, cardinality, k = key
        rows = groups[key]
        values = [r["value"] for r in rows]
        base = rows[0]["upper"] / _UPPER_COEFF[mode]
        ratios = [v / base for v in values]
        out.append({
            "n": n, "mode": mode, "cardinality": cardinality, "k": k,
            "count": len(rows),
            "value_min": min(values),
            "value_median": float(statistics.median(values)),
            "value_max": max(values),
            "lower": rows[0]["lower"],
            "upper": rows[0]["upper"],
            "within_fraction": sum(r["within_band"] for r in rows) / len(rows),
            "approx_fraction": sum(r["approximate"] for r in rows) / len(rows),
            "ratio_min": min(ratios),
            "ratio_median": float(statistics.median(ratios)),
            "ratio_max": max(ratios),
        })
    summary = {"total_records": len(dicts), "groups": out}
    if confidence is not None:
        summary["confidence"] = confidence
    return summary


def tv_distance(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(x, 0.0) - q.get(x, 0.0)) for x in keys)


def exact_distribution_oracle(length: int, family_size: int, k: int) -> dict[int, float]:
    """Exact pmf of the family measure over ALL families of the given size,
    by full enumeration.  Desk-scale only: length <= 12 and the number of
    families capped at 10^7."""
    if length < 2 or length > 12:
        raise ValueError("oracle supports 2 <= length <= 12")
    if family_size < 1:
        raise ValueError("family_size must be at least 1")
    total_seqs = 1 << length
    if family_size > total_seqs:
        raise ValueError("family_size exceeds 2^length")
    n_families = math.comb(total_seqs, family_size)
    if n_families > 10**7:
        raise ValueError("too many families to enumerate (over 10^7)")
    if k < 2 or k > length * family_size:
        raise ValueError("order k out of range")
    seqs = [BinarySequence.from_bits([(code >> (length - 1 - i)) & 1
                                      for i in range(length)])
            for code in range(total_seqs)]
    counts: dict[int, int] = {}
    for combo in itertools.combinations(range(total_seqs), family_size):
        fam = SequenceFamily(members=tuple(seqs[c] for c in combo))
        val = phi(fam, k, budget=None).value
        counts[val] = counts.get(val, 0) + 1
    return {v: counts[v] / n_families for v in sorted(counts)}


@dataclass(frozen=True)
class CollisionReport:
    length: int
    seed_count: int
    trials: int
    seed: int
    formula: float
    empirical: float


def collision_experiment(length: int, seed_count: int, trials: int,
                         seed: int) -> CollisionReport:
    """Empirical collision-free rate of iid uniform images vs the product
    formula."""
    from .tailmath import collision_free_probability
    if trials < 1:
        raise ValueError("trials must be at least 1")
    injective = 0
    for t in range(trials):
        rng = stream(seed, t)
        draws = rng.integers(0, 2, size=(seed_count, length), dtype=np.uint8)
        packed = np.packbits(draws, axis=1)
        seen = {packed[i].tobytes() for i in range(seed_count)}
        injective += (len(seen) == seed_count)
    return CollisionReport(
        length=length, seed_count=seed_count, trials=trials, seed=seed,
        formula=collision_free_probability(length, seed_count),
        empirical=injective / trials)
