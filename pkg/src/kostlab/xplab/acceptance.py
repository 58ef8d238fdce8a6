"""Exit criteria of the laboratory, shared by the test suite and ``singulab verify``.

Each ``criterion_N`` returns a ``Criterion`` with a pass flag and the
measured numbers; nothing is loosened when a check fails.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import special_ortho_group

from ..fields import BargmannFockField, KernelSpec, sample_coupled, truncation_order
from ..kacrice import expected_count_sphere, kac_rice_density, sqrt_law_constant
from ..polycore import KostlanSpec, empirical_covariance, sample_kostlan
from ..seeding import philox, substream_seed
from ..singulab import ZeroSet, find_zeros_circle
from ..singulab.curves import DISK_MARGIN
from ..topo import Histogram, betti_histogram, tv_distance
from .config import ExperimentConfig, format_config
from .fit import degree_means, scaling_fit
from .runner import discard_rates, run_experiment

ROOT_SEED = 20240917


@dataclass
class Criterion:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0
    data: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] C{self.number} {self.title}: {self.detail} ({self.seconds:.1f} s)"


def _cfg(kind, degrees, trials, **kw):
    opts = kw.pop("options", {})
    return ExperimentConfig(kind=kind, degrees=tuple(degrees), trials=trials, seed=ROOT_SEED,
                            options=opts, **kw)


_RUNS = {}


def _timed_run(cfg: ExperimentConfig):
    """Run once per distinct config; later criteria reuse the records."""
    key = format_config(cfg)
    if key not in _RUNS:
        t0 = time.perf_counter()
        records = run_experiment(cfg, threads=1)
        _RUNS[key] = (records, time.perf_counter() - t0)
    return _RUNS[key]


def _within(mean, se, target, k=3.0):
    return abs(mean - target) <= k * se


# ---------------------------------------------------------------- 1-4: counts and slopes

def _zeros_m1():
    return _timed_run(_cfg("zeros", (16, 64, 256), 4000, m=1, k=1))


def _zeros_m2():
    return _timed_run(_cfg("zeros", (4, 9, 16), 500, m=2, k=2))


def criterion_1():
    records, secs = _zeros_m1()
    means = degree_means(records, "zeros")
    ok, parts = secs < 120, []
    for d, target in zip((16, 64, 256), (8, 16, 32)):
        m, se, n = means[d]
        ok &= _within(m, se, target) and abs(m - target) <= 0.02 * target
        parts.append(f"d={d}: {m:.3f}+-{se:.3f} (target {target})")
    return Criterion(1, "mean zero count m=1", bool(ok),
                     "; ".join(parts) + f"; runtime {secs:.1f} s < 120 s", secs)


def criterion_2():
    records, secs = _zeros_m2()
    means = degree_means(records, "zeros")
    ok, parts = secs < 600, []
    for d, target in zip((4, 9, 16), (8, 18, 32)):
        m, se, n = means[d]
        ok &= _within(m, se, target)
        parts.append(f"d={d}: {m:.3f}+-{se:.3f} (target {target})")
    return Criterion(2, "mean zero count m=k=2", bool(ok),
                     "; ".join(parts) + f"; runtime {secs:.1f} s < 600 s", secs)


def _components():
    return _timed_run(_cfg("components", (16, 36, 64, 144), 300))


def criterion_3():
    t0 = time.perf_counter()
    f1 = scaling_fit(_zeros_m1()[0], "zeros")
    f2 = scaling_fit(_zeros_m2()[0], "zeros")
    rec, _ = _components()
    f3 = scaling_fit(rec, "components")
    means = {d: round(m, 3) for d, (m, _, _) in degree_means(rec, "components").items()}
    ok = (abs(f1.slope - 0.5) <= 0.05 and abs(f2.slope - 1.0) <= 0.10
          and abs(f3.slope - 1.0) <= 0.15)
    detail = (f"m=1 zeros slope {f1.slope:.4f} (0.50+-0.05); m=k=2 zeros slope {f2.slope:.4f} "
              f"(1.00+-0.10); S^2 components slope {f3.slope:.4f}+-{f3.slope_se:.4f} "
              f"(1.00+-0.15), means {means}")
    return Criterion(3, "square-root-law slopes", bool(ok), detail, time.perf_counter() - t0,
                     {"slopes": (f1.slope, f2.slope, f3.slope)})


def criterion_4():
    rec, secs = _timed_run(_cfg("cusp", (6, 12, 24, 48), 300))
    fit = scaling_fit(rec, "cusps")
    viol = sum(r.value for r in rec if r.statistic == "thm31_violation" and not r.discarded)
    rates = discard_rates(rec)
    ok = abs(fit.slope - 1.0) <= 0.15 and viol == 0
    means = {d: round(m, 2) for d, (m, _, _) in degree_means(rec, "cusps").items()}
    return Criterion(4, "cusp scaling", bool(ok),
                     f"slope {fit.slope:.4f}+-{fit.slope_se:.4f} (1.00+-0.15); means {means}; "
                     f"count > 1e3 d^2 on {int(viol)} trials; discard rates {rates}", secs)


# ---------------------------------------------------------------- 5-7: deterministic bounds

def criterion_5():
    t0 = time.perf_counter()
    cs = anti = trials = 0
    worst = {}
    for m in (1, 2):
        rec, _ = _timed_run(_cfg("crit", tuple(range(2, 9)), 72, m=m, k=1))
        for r in rec:
            if r.discarded:
                continue
            if r.statistic == "cs_violation":
                cs += int(r.value)
                trials += 1
                if r.value:
                    worst[(m, r.d)] = worst.get((m, r.d), 0) + 1
            elif r.statistic == "antipodal_violation":
                anti += int(r.value)
    detail = (f"{trials} trials; bound 2(d-1)^m + ... + (d-1) + 1 violated on {cs} "
              f"(by (m, d): {dict(sorted(worst.items()))}); antipodal bound "
              f"2*sum (d-1)^i violated on {anti}")
    return Criterion(5, "Cartwright-Sturmfels bound", cs == 0 and trials >= 1000, detail,
                     time.perf_counter() - t0, {"cs": cs, "antipodal": anti})


def criterion_6():
    rec, secs = _timed_run(_cfg("components", (20,), 200, options={"directions": 20}))
    audits = sum(r.value for r in rec if r.statistic == "morse_audits" and not r.discarded)
    fails = sum(r.value for r in rec if r.statistic == "morse_failures" and not r.discarded)
    curves = sum(1 for r in rec if r.statistic == "components" and not r.discarded)
    return Criterion(6, "Morse audit", fails == 0 and curves >= 190,
                     f"{curves} curves, {int(audits)} audits, {int(fails)} failures", secs)


def criterion_7():
    t0 = time.perf_counter()
    parts, ok = [], True
    for m, trials, dprime in ((1, 200, 60), (2, 100, 30)):
        cfg = _cfg("semicont", (10,), trials, m=m, k=1, options={"dprime": dprime})
        rec, _ = _timed_run(cfg)
        base = {r.trial: r.value for r in rec if r.statistic == "b0_base" and not r.discarded}
        pert = {r.trial: r.value for r in rec if r.statistic == "b0_pert" and not r.discarded}
        viol = sum(pert[i] < base[i] for i in base)
        rate = discard_rates(rec)[10]
        ok &= viol == 0 and rate < 0.05 and len(base) >= 0.95 * trials
        parts.append(f"S^{m}: {len(base)} accepted, {viol} violations, discard {rate:.1%}")
    return Criterion(7, "C0 semicontinuity", bool(ok), "; ".join(parts), time.perf_counter() - t0)


# ---------------------------------------------------------------- 8-11: fields and Kac-Rice

def criterion_8():
    rec, secs = _timed_run(_cfg("coupled", (8, 32, 128, 512), 50, m=2, k=1))
    med = [float(np.median([r.value for r in rec if r.d == d and r.statistic == "sup_distance"]))
           for d in (8, 32, 128, 512)]
    ok = all(b < a for a, b in zip(med, med[1:])) and med[-1] < 0.25 * med[0]
    return Criterion(8, "coupled convergence", bool(ok),
                     "medians " + ", ".join(f"{v:.4g}" for v in med), secs)


def _arc_count(P, start, width=math.pi / 2):
    ang = find_zeros_circle(P).flags["angles"]
    return int(np.count_nonzero(np.mod(ang - start, 2 * np.pi) < width))


def criterion_9():
    t0 = time.perf_counter()
    rng = philox(ROOT_SEED, 9)
    d, ok, parts = 4, True, []
    for j in range(5):
        x = rng.standard_normal(3)
        x /= np.linalg.norm(x)
        y = rng.standard_normal(3)
        y -= (y @ x) * x
        y /= np.linalg.norm(y)
        c = [0.9, 0.5, 0.2, -0.6, 0.75][j]
        y = c * x + math.sqrt(1 - c * c) * y
        mean, se = empirical_covariance(KostlanSpec(2, 1, d, substream_seed(ROOT_SEED, "cov", j)),
                                        x, y, 20_000)
        target = c ** d
        ok &= bool(np.all(np.abs(mean - target) <= 5 * se))
        parts.append(f"x.y={c}: {mean[0, 0]:.4f}+-{se[0, 0]:.4f} vs {target:.4f}")
    # rotation invariance of the zero count on a fixed arc of S^1
    dz, n = 16, 1500
    base = np.array([_arc_count(sample_kostlan(KostlanSpec(1, 1, dz, substream_seed(
        ROOT_SEED, "rot", 0, i))), 0.0) for i in range(n)])
    for r in range(1, 4):
        R = special_ortho_group.rvs(2, random_state=philox(ROOT_SEED, 90 + r))
        phi = math.atan2(R[1, 0], R[0, 0])
        rot = np.array([_arc_count(sample_kostlan(KostlanSpec(1, 1, dz, substream_seed(
            ROOT_SEED, "rot", r, i))), phi) for i in range(n)])
        se = math.sqrt(base.var(ddof=1) / n + rot.var(ddof=1) / n)
        ok &= abs(rot.mean() - base.mean()) <= 3 * se
        parts.append(f"rotation {phi:+.3f}: arc mean {rot.mean():.3f} vs {base.mean():.3f}"
                     f" (3 SE = {3 * se:.3f})")
    return Criterion(9, "covariance law and rotation invariance", bool(ok), "; ".join(parts),
                     time.perf_counter() - t0)


def _bf_crossing_density(trials=3000, half=1.0, n=4001):
    t = np.linspace(-half, half, n)
    counts = np.empty(trials)
    for i in range(trials):
        X = BargmannFockField.sample(1, 1, substream_seed(ROOT_SEED, "bf", i))
        v = X.jet(t[:, None], 0)[0][:, 0]
        counts[i] = np.count_nonzero(np.sign(v[:-1]) != np.sign(v[1:]))
    L = 2 * half
    return counts.mean() / L, counts.std(ddof=1) / math.sqrt(trials) / L


def criterion_10():
    t0 = time.perf_counter()
    e = expected_count_sphere(ZeroSet(1), 25, 1, 100_000, ROOT_SEED)
    rho, se = kac_rice_density(ZeroSet(1), KernelSpec("bargmann-fock", None, 1, 1), [0.0],
                               100_000, ROOT_SEED)
    bf, bf_se = _bf_crossing_density()
    ok = (abs(e.value - 10.0) <= 0.01 * 10.0 and abs(rho - 1 / math.pi) <= 3 * se
          and abs(bf - rho) <= 3 * math.hypot(se, bf_se))
    detail = (f"integrated m=1 d=25: {e.value:.4f}+-{e.stderr:.4f} (10 +- 1%); "
              f"rho_BF(0) = {rho:.5f}+-{se:.5f} vs 1/pi = {1 / math.pi:.5f}; "
              f"crossing oracle {bf:.5f}+-{bf_se:.5f}")
    return Criterion(10, "Kac-Rice consistency", bool(ok), detail, time.perf_counter() - t0)


def criterion_11():
    t0 = time.perf_counter()
    cw = sqrt_law_constant(ZeroSet(1), 1, 20_000, ROOT_SEED)
    rec, _ = _timed_run(_cfg("zeros", (400,), 1000, m=1, k=1, experiment_id="holdout"))
    m, se, _ = degree_means(rec, "zeros")[400]
    pred, pse = cw.value * 20.0, cw.stderr * 20.0
    ok = abs(pred - m) <= 3 * math.hypot(se, pse)
    return Criterion(11, "C_W cross-validation", bool(ok),
                     f"C_W = {cw.value:.4f}+-{cw.stderr:.4f}; predicted {pred:.3f}+-{pse:.3f} "
                     f"vs empirical {m:.3f}+-{se:.3f} at d=400", time.perf_counter() - t0)


# ---------------------------------------------------------------- 12-13: limit laws

# Interior ovals of a unit-scale field are rare in the unit disk (about 1 in 150
# samples), so the histograms there are point masses.  The limit law holds for
# every fixed rescaled radius; R = 4 gives a nondegenerate histogram.
BETTI_RADIUS = 4.0
BETTI_DEGREE = truncation_order(BETTI_RADIUS * DISK_MARGIN, 1e-6, 2, 1)


def coupled_disk_sampler(d, seed, D=BETTI_DEGREE):
    return sample_coupled(2, 1, D, seed).view(d)


def criterion_12():
    t0 = time.perf_counter()
    rows = []
    for b in range(5):
        seed = substream_seed(ROOT_SEED, "betti", b)
        h = {d: betti_histogram(coupled_disk_sampler, ZeroSet(1), d, 300, seed, BETTI_RADIUS)
             for d in (16, 64, 256)}
        rows.append((tv_distance(h[16], h[64]), tv_distance(h[64], h[256])))
    far = float(np.median([r[0] for r in rows]))
    near = float(np.median([r[1] for r in rows]))
    return Criterion(12, "Betti-law stabilization", near < far,
                     f"interior ovals in |u| < {BETTI_RADIUS:g}: median tv(64,256) = "
                     f"{near:.4f} vs tv(16,64) = {far:.4f}",
                     time.perf_counter() - t0, {"tv": rows})


def criterion_13():
    t0 = time.perf_counter()
    opts = {"representation": "coupled"}
    rec, _ = _timed_run(_cfg("knot", (12, 50, 100), 500, options=opts))
    hist = {}
    for d in (12, 50, 100):
        vals = [r.value for r in rec if r.d == d and r.statistic == "crossings" and not r.discarded]
        hist[d] = Histogram.from_values(vals)
    mind = [r.value for r in rec if r.d == 50 and r.statistic == "min_distance" and not r.discarded]
    audit_ok = all(v > 1e-6 for v in mind)
    rate = discard_rates(rec)[50]
    near, far = tv_distance(hist[50], hist[100]), tv_distance(hist[12], hist[50])
    ok = audit_ok and rate < 0.01 and near < far
    return Criterion(13, "random knots", bool(ok),
                     f"{len(mind)} accepted at d=50, audit {'passes' if audit_ok else 'FAILS'}, "
                     f"discard {rate:.1%}; tv(50,100) = {near:.4f} vs tv(12,50) = {far:.4f}",
                     time.perf_counter() - t0)


CRITERIA = {n: globals()[f"criterion_{n}"] for n in range(1, 14)}


def run_criterion(n) -> Criterion:
    t0 = time.perf_counter()
    c = CRITERIA[n]()
    if not c.seconds:
        c.seconds = time.perf_counter() - t0
    return c


def run_all(numbers=None, echo=None):
    out = []
    for n in numbers or sorted(CRITERIA):
        c = run_criterion(n)
        if echo is not None:
            echo(c.line())
        out.append(c)
    return out
