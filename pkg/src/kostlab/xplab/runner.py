"""Seeded, schedule-independent execution of Monte Carlo trials."""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateSample, ExcessiveDiscards
from ..fields import sample_coupled, truncation_order
from ..kacrice import (antipodal_critical_bound, cartwright_sturmfels_bound,
                       expected_count_sphere)
from ..polycore import KostlanSpec, sample_kostlan
from ..seeding import philox, substream_seed
from ..singulab import (CriticalPoints, FoldCurve, Minima, ZeroSet, extract_zero_curve,
                        find_cusps, find_singular_points, find_zeros_circle, sample_knot)
from ..topo import PerturbationSpec, betti_of, morse_audit_retry, semicontinuity_trial
from .config import ExperimentConfig

THM31_CONSTANT = 1e3
DISCARD_LIMIT = {"semicont": 0.05}
DEFAULT_DISCARD_LIMIT = 0.01
COUPLED_EPS = 1e-6

PRIMARY = {
    "zeros": "zeros", "crit": "critical_points", "minima": "minima",
    "fold": "fold_components", "cusp": "cusps", "components": "components",
    "semicont": "b0_pert", "coupled": "sup_distance", "knot": "crossings",
    "kacrice": "expected_count",
}


@dataclass(frozen=True)
class TrialRecord:
    experiment_id: str
    m: int
    k: int
    d: int
    trial: int
    seed: int
    statistic: str
    value: float
    discarded: bool
    runtime_ms: float = 0.0


def primary_statistic(cfg: ExperimentConfig) -> str:
    kind = cfg.option("base", "zeros") if cfg.kind == "scaling" else cfg.kind
    return PRIMARY[kind]


def coupled_across_degrees(cfg: ExperimentConfig) -> bool:
    """Kinds whose trial ``i`` reads one shared table at every degree."""
    return cfg.kind == "coupled" or (cfg.kind == "knot"
                                     and cfg.option("representation") == "coupled")


def trial_seed(cfg: ExperimentConfig, d, index) -> int:
    if coupled_across_degrees(cfg):
        return substream_seed(cfg.seed, cfg.experiment_id, index)
    return substream_seed(cfg.seed, cfg.experiment_id, d, index)


# ---------------------------------------------------------------- trial bodies

def _kostlan(cfg, d, seed, m=None, k=None):
    return sample_kostlan(KostlanSpec(m or cfg.m, k or cfg.k, d, seed))


def _zeros(cfg, d, seed):
    P = _kostlan(cfg, d, seed, k=cfg.m)
    if cfg.m == 1:
        return {"zeros": find_zeros_circle(P).count}
    return {"zeros": find_singular_points(P, ZeroSet(cfg.m), h=cfg.option("h")).count}


def _bound_checks(count, m, d):
    out = {"thm31_violation": int(count > THM31_CONSTANT * d ** m)}
    if d >= 2:
        out["cs_violation"] = int(count > cartwright_sturmfels_bound(m, d))
        out["antipodal_violation"] = int(count > antipodal_critical_bound(m, d))
    return out


def _crit(cfg, d, seed, cls=CriticalPoints, name="critical_points"):
    P = _kostlan(cfg, d, seed, k=1)
    n = find_singular_points(P, cls, h=cfg.option("h")).count
    out = {name: n}
    if cls is CriticalPoints:
        out.update(_bound_checks(n, cfg.m, d))
    return out


def _minima(cfg, d, seed):
    return _crit(cfg, d, seed, Minima, "minima")


def _fold(cfg, d, seed):
    curve = extract_zero_curve(_kostlan(cfg, d, seed, 2, 2), FoldCurve, h=cfg.option("h"))
    b = betti_of(curve)
    return {"fold_components": b.b0, "fold_closed": b.b1}


def _cusp(cfg, d, seed):
    n = find_cusps(_kostlan(cfg, d, seed, 2, 2), h=cfg.option("h")).count
    return {"cusps": n, "thm31_violation": int(n > THM31_CONSTANT * d ** 2)}


def _components(cfg, d, seed):
    P = _kostlan(cfg, d, seed, 2, 1)
    curve = extract_zero_curve(P, h=cfg.option("h"))
    b0 = betti_of(curve).b0
    if cfg.option("resolution_check", False):
        fine = betti_of(extract_zero_curve(P, h=curve.h / 2)).b0
        if fine != b0:
            raise DegenerateSample("component count changes when the grid is doubled",
                                   coarse=b0, fine=fine)
    out = {"components": b0}
    ndir = cfg.option("directions", 0)
    if ndir:
        rng = philox(seed, 0x6D6F7273)
        fails = sum(not morse_audit_retry(curve, rng)[1] for _ in range(ndir))
        out.update(morse_audits=ndir, morse_failures=fails)
    return out


def _semicont(cfg, d, seed):
    P = _kostlan(cfg, d, seed, k=1)
    mode = cfg.option("mode", "random-high-degree")
    omega = cfg.option("dprime", 6 * d) if mode == "random-high-degree" else \
        cfg.option("omega", 40.0)
    spec = PerturbationSpec(cfg.option("eps"), omega, mode, substream_seed(seed, "pert"))
    r = semicontinuity_trial(P, spec)
    if not r.both_transversal:
        raise DegenerateSample("perturbed zero set failed the transversality audit")
    return {"b0_base": r.b0_base, "b0_pert": r.b0_pert, "amplitude": r.amplitude}


def coupled_sup_distance(pair, d, m, n_grid=41):
    t = np.linspace(-1.0, 1.0, n_grid if m == 2 else 201)
    if m == 1:
        u = t[:, None]
    else:
        A, B = np.meshgrid(t, t, indexing="ij")
        u = np.column_stack([A.ravel(), B.ravel()])
        u = u[np.einsum("ij,ij->i", u, u) <= 1.0 + 1e-12]
    return float(np.abs(pair.view(d).jet(u, 0)[0] - pair.view(None).jet(u, 0)[0]).max())


def _coupled(cfg, d, seed):
    D = cfg.option("D") or truncation_order(1.0, COUPLED_EPS, cfg.m, cfg.k)
    pair = sample_coupled(cfg.m, cfg.k, D, seed)
    return {"sup_distance": coupled_sup_distance(pair, d, cfg.m)}


def _knot(cfg, d, seed):
    r = sample_knot(d, cfg.option("n_points"), seed, cfg.option("representation", "kostlan"))
    return {"crossings": r.crossings, "min_distance": r.min_distance,
            "projection_retries": r.retries}


def _kacrice(cfg, d, seed):
    e = expected_count_sphere(ZeroSet(cfg.m), d, cfg.m, cfg.option("mc_samples", 100_000), seed)
    return {"expected_count": e.value, "expected_count_se": e.stderr}


TRIALS = {
    "zeros": _zeros, "crit": _crit, "minima": _minima, "fold": _fold, "cusp": _cusp,
    "components": _components, "semicont": _semicont, "coupled": _coupled, "knot": _knot,
    "kacrice": _kacrice,
}


def trial_function(cfg: ExperimentConfig):
    kind = cfg.option("base", "zeros") if cfg.kind == "scaling" else cfg.kind
    return TRIALS[kind]


def run_trial(cfg: ExperimentConfig, d, index):
    """All records of one trial (a single discarded record if its audit failed)."""
    seed = trial_seed(cfg, d, index)
    t0 = time.perf_counter()
    try:
        stats = trial_function(cfg)(cfg, d, seed)
        discarded = False
    except DegenerateSample:
        stats = {primary_statistic(cfg): math.nan}
        discarded = True
    ms = (time.perf_counter() - t0) * 1e3 if cfg.timing else 0.0
    return [TrialRecord(cfg.experiment_id, cfg.m, cfg.k, d, index, seed, name, float(value),
                        discarded, ms)
            for name, value in stats.items()]


def _run_chunk(cfg, tasks):
    return [rec for d, i in tasks for rec in run_trial(cfg, d, i)]


def resolve_threads(threads=None) -> int:
    if threads is None:
        env = os.environ.get("SINGULAB_THREADS")
        threads = int(env) if env else 1
    return max(1, int(threads))


def run_experiment(cfg: ExperimentConfig, threads=None, check_discards=True):
    """Run every (degree, trial) pair; records are sorted by (d, trial, statistic)."""
    tasks = [(d, i) for d in cfg.degrees for i in range(cfg.trials)]
    workers = resolve_threads(cfg.threads if threads is None else threads)
    if workers == 1:
        records = _run_chunk(cfg, tasks)
    else:
        chunks = [tasks[j::workers * 4] for j in range(workers * 4)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = [r for part in pool.map(_run_chunk, [cfg] * len(chunks), chunks)
                       for r in part]
    records.sort(key=lambda r: (r.d, r.trial, r.statistic))
    if check_discards:
        check_discard_rate(cfg, records)
    return records


def discard_rates(records) -> dict:
    seen = {}
    for r in records:
        seen[(r.d, r.trial)] = r.discarded
    out = {}
    for (d, _), disc in seen.items():
        n, k = out.get(d, (0, 0))
        out[d] = (n + 1, k + int(disc))
    return {d: k / n for d, (n, k) in out.items()}


def check_discard_rate(cfg: ExperimentConfig, records):
    """Fail loudly when default-resolution runs at d <= 256 discard too much."""
    if cfg.option("h") is not None:
        return
    limit = DISCARD_LIMIT.get(cfg.kind, DEFAULT_DISCARD_LIMIT)
    for d, rate in discard_rates(records).items():
        if d <= 256 and rate >= limit:
            err = ExcessiveDiscards(f"discard rate {rate:.3%} at d = {d} exceeds {limit:.0%}")
            err.records = records
            raise err
