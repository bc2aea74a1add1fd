"""Monte Carlo estimators for the supercritical-phase observables.

Every estimator is a deterministic function of (model, parameters, master
seed, replica count): replica i always runs on the derived seed
``spawn_seed(master, lane + i)``, chunk sizes are fixed constants, and
aggregation happens once over the per-replica arrays in index order, so the
reported numbers do not depend on the thread count.

All reported quantities are finite-horizon proxies; the horizon is an
explicit parameter carried in the result record.  Estimators refuse (raise a
subclass of ``EstimatorRefused``) rather than return a number whose estimand
is degenerate at the requested parameters.
"""

from __future__ import annotations

import math
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import product, repeat

import numpy as np
from scipy import ndimage, stats

from .dynamics import (
    EDGE_NONE,
    BatchState,
    BlockDomain,
    ConeDomain,
    DimensionNot2,
    batch_evolve,
    half_slab_init,
    hit_and_coupled_regions,
    rows_from_sites,
    slab_window_rows,
    torus_extinction_batch,
)
from .field import FieldSpec, spawn_seed, spawn_seeds
from .geometry import (
    BlockGeometry,
    ConvexPolytope,
    TranslatedBlock,
    as_fraction,
    bg_target_blocks,
)
from .model import NormalizedModel


class EstimatorError(RuntimeError):
    pass


class EstimatorRefused(EstimatorError):
    """The estimand is degenerate at these parameters; maps to exit code 2."""


class SubcriticalRefused(EstimatorRefused):
    pass


class InsufficientDeaths(EstimatorRefused):
    pass


class InsufficientSurvivals(EstimatorRefused):
    pass


class CensoredMean(EstimatorRefused):
    pass


class ConeOutsideShape(EstimatorRefused):
    pass


class NoCrossingFound(EstimatorRefused):
    pass


class BracketNotFound(EstimatorRefused):
    pass


class GeometryInvalid(EstimatorRefused):
    pass


# ---------------------------------------------------------------------------
# summary statistics

_Z95 = 1.959963984540054


def _wilson(k: int, n: int) -> tuple[float, float]:
    z2 = _Z95 * _Z95
    phat = k / n
    denom = 1 + z2 / n
    centre = phat + z2 / (2 * n)
    half = _Z95 * math.sqrt(phat * (1 - phat) / n + z2 / (4 * n * n))
    return ((centre - half) / denom, (centre + half) / denom)


@dataclass(frozen=True)
class Estimate:
    """Point estimate with standard error and a 95% confidence interval."""

    mean: float
    stderr: float
    n: int
    ci95: tuple[float, float]

    @classmethod
    def from_bernoulli(cls, successes, n: int) -> "Estimate":
        if n <= 0:
            raise EstimatorError("sample count must be positive")
        k = int(successes)
        phat = k / n
        # sample sd with ddof=1, matching the generic stderr definition
        sd = math.sqrt(phat * (1 - phat) * n / (n - 1)) if n > 1 else 0.0
        return cls(phat, sd / math.sqrt(n), n, _wilson(k, n))

    @classmethod
    def from_samples(cls, values) -> "Estimate":
        a = np.asarray(values, dtype=float)
        n = int(a.size)
        if n == 0:
            raise EstimatorError("no samples")
        m = float(a.mean())
        sd = float(a.std(ddof=1)) if n > 1 else 0.0
        se = sd / math.sqrt(n)
        return cls(m, se, n, (m - _Z95 * se, m + _Z95 * se))


# ---------------------------------------------------------------------------
# replica-parallel plumbing

# replica seeds live in disjoint lanes so auxiliary runs (pre-checks,
# stability repeats) never share seeds with the main replicas
_LANE = 1 << 32


def _rep_seeds(master: int, lane: int, start: int, stop: int) -> np.ndarray:
    base = lane * _LANE
    return spawn_seeds(master, base + start, base + stop)


def _spans(start: int, stop: int, chunk: int):
    return [(i, min(i + chunk, stop)) for i in range(start, stop, chunk)]


def _run_spans(worker, common, spans, threads: int) -> list:
    if threads <= 1 or len(spans) <= 1:
        return [worker(common, s) for s in spans]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(worker, repeat(common), spans, chunksize=1))


def _run_chunks(worker, common, n: int, chunk: int, threads: int) -> list:
    return _run_spans(worker, common, _spans(0, n, chunk), threads)


# ---------------------------------------------------------------------------
# survival curves

_SURVIVAL_CHUNK = 2048


def _survival_chunk(common, span):
    model, p, T, dual, master, lane = common
    seeds = _rep_seeds(master, lane, *span)
    res = batch_evolve(model, seeds, p, T, dual=dual, compact=True)
    return res.extinction, res.alive_at_T


@dataclass
class SurvivalCurve:
    """Survival frequency at horizon T plus the raw extinction steps."""

    estimate: Estimate
    taus: np.ndarray            # extinction step per replica; -1 if alive at T
    p: float
    T: int
    reps: int
    seed: int
    dual: bool

    def survival_function(self, t: int) -> float:
        """Empirical P(tau >= t); replicas alive at T count as tau > T."""
        tau_eff = np.where(self.taus < 0, self.T + 1, self.taus)
        return float((tau_eff >= t).mean())


def survival_curve(model: NormalizedModel, p, T: int, reps: int, seed: int,
                   threads: int = 1, dual: bool = False,
                   lane: int = 0) -> SurvivalCurve:
    """Fraction of origin-started replicas alive at horizon T."""
    if reps < 1:
        raise EstimatorError("reps must be >= 1")
    parts = _run_chunks(
        _survival_chunk, (model, p, T, dual, seed, lane), reps,
        _SURVIVAL_CHUNK, threads,
    )
    taus = np.concatenate([t for t, _ in parts])
    alive = np.concatenate([a for _, a in parts])
    return SurvivalCurve(
        estimate=Estimate.from_bernoulli(alive.sum(), reps),
        taus=taus, p=p, T=T, reps=reps, seed=seed, dual=dual,
    )


def dual_survival_curve(model: NormalizedModel, p, T: int, reps: int,
                        seed: int, threads: int = 1) -> SurvivalCurve:
    """Fraction of replicas whose dual from the origin reaches depth T."""
    return survival_curve(model, p, T, reps, seed, threads=threads, dual=True)


# ---------------------------------------------------------------------------
# critical point proxy

_EVENT_CHUNK = 1024


def _event_chunk(common, span):
    model, p, T, L_stop, master, lane = common
    seeds = _rep_seeds(master, lane, *span)
    res = batch_evolve(model, seeds, p, T, stop_extent=L_stop)
    return res.alive_at_T | res.reached_extent


def _event_freq(model, p, T, L_stop, reps, master, lane, threads) -> Estimate:
    ev = np.concatenate(_run_chunks(
        _event_chunk, (model, p, T, L_stop, master, lane), reps,
        _EVENT_CHUNK, threads,
    ))
    return Estimate.from_bernoulli(ev.sum(), reps)


@dataclass
class CriticalPoint:
    """Finite-size proxy bracket for the critical probability.

    The event bisected is "the origin cluster reaches time T or spatial
    extent L_stop"; p_hat is the midpoint of the final bracket.  This is a
    proxy at the stated horizon, not the infinite-volume threshold.
    """

    p_lo: float
    p_hi: float
    p_hat: float
    sweep: list                  # (p, Estimate) pairs visited by bisection
    stability: list              # Estimate at p_hat under independent seeds
    T: int
    L_stop: int
    reps: int
    seed: int


def critical_point(model: NormalizedModel, T: int, L_stop: int, reps: int,
                   tol: float, seed: int, threads: int = 1) -> CriticalPoint:
    if tol <= 0:
        raise EstimatorError("tol must be positive")
    sweep = []

    def freq(p, lane=0):
        e = _event_freq(model, p, T, L_stop, reps, seed, lane, threads)
        sweep.append((p, e))
        return e.mean

    if freq(0.0) >= 0.5 or freq(1.0) < 0.5:
        raise BracketNotFound(
            "event frequency does not cross 1/2 on [0, 1] at this horizon"
        )
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if freq(mid) >= 0.5:
            hi = mid
        else:
            lo = mid
    p_hat = (lo + hi) / 2
    stability = [
        _event_freq(model, p_hat, T, L_stop, reps, seed, lane, threads)
        for lane in (1, 2, 3)
    ]
    return CriticalPoint(
        p_lo=lo, p_hi=hi, p_hat=p_hat, sweep=sweep, stability=stability,
        T=T, L_stop=L_stop, reps=reps, seed=seed,
    )


# ---------------------------------------------------------------------------
# limit shape

def _longest_run(mask: np.ndarray):
    """Endpoints (inclusive) of the longest run of True, or None."""
    if not mask.any():
        return None
    edges = np.flatnonzero(np.diff(np.concatenate(
        ([0], mask.astype(np.int8), [0])
    )))
    starts, ends = edges[::2], edges[1::2]
    k = int(np.argmax(ends - starts))
    return int(starts[k]), int(ends[k]) - 1


_SHAPE_CHUNK = 4
_SHAPE_BLOCK = 32


def _shape_chunk(common, span):
    model, p, t, T_cond, master, lane, directions, ns = common
    out = []
    for i in range(*span):
        si = _rep_seeds(master, lane, i, i + 1)[0]
        pre = batch_evolve(model, [si], p, T_cond, compact=True)
        if not pre.alive_at_T[0]:
            out.append(None)
            continue
        lo = (t * model.spatial_min[0] - 1,)
        hi = (t * model.spatial_max[0] + 2,)
        hc = hit_and_coupled_regions(model, FieldSpec(si, p), t, (lo, hi))
        run = _longest_run((hc.H & hc.K)[0])
        if run is None:
            out.append(None)
            continue
        a, b = run
        occ = np.flatnonzero(hc.xi_origin[0])
        support = (
            (int(lo[0] + occ[0]), int(lo[0] + occ[-1])) if occ.size else None
        )
        mus = {}
        for dvec in directions:
            pts = []
            for n in ns:
                tn = hc.hitting.get((round(n * dvec[0]),))
                if tn is not None:
                    pts.append((n, tn))
            if len(pts) >= 3:
                mus[dvec] = sum(n * tn for n, tn in pts) / sum(
                    n * n for n, _ in pts
                )
            else:
                mus[dvec] = None
        out.append(((lo[0] + a) / t, (lo[0] + b) / t, support, mus))
    return out


@dataclass
class ShapeEstimate:
    """Rescaled limit-shape interval and per-direction time constants (d=2).

    The interval endpoints come from the longest solid run of agreement
    between the hit region and the coupled region on the bottom slab row:
    chance agreements of two empty indicators outside the growth region do
    not join the run, so the run endpoints track the true frontier.
    """

    p: float
    t: int
    T_cond: int
    seed: int
    reps: int                    # conditioned replicas used
    attempts: int                # attempts consumed to reach the quota
    directions: tuple
    mu_hat: dict                 # direction -> Estimate or None
    u_lo: Estimate
    u_hi: Estimate
    lo_samples: np.ndarray
    hi_samples: np.ndarray
    supports: list               # per-replica (min, max) of xi^o row 0

    @property
    def u_hat(self) -> tuple[float, float]:
        return (self.u_lo.mean, self.u_hi.mean)


def shape_and_time_constants(model: NormalizedModel, p, t: int, reps: int,
                             grid=None, T_cond: int | None = None,
                             seed: int = 0, threads: int = 1,
                             survival_floor: float = 0.2,
                             attempt_budget: int | None = None) -> ShapeEstimate:
    """Shape interval at time t from replicas conditioned on survival."""
    if model.d != 2:
        raise DimensionNot2("shape estimation is implemented for d = 2")
    T_cond = t if T_cond is None else T_cond
    pre = survival_curve(
        model, p, min(t, 200), 200, seed, threads=threads, lane=9
    )
    if pre.estimate.mean < survival_floor:
        raise SubcriticalRefused(
            f"survival frequency {pre.estimate.mean:.3f} at T={pre.T} is "
            f"below the floor {survival_floor}"
        )
    directions = tuple(
        tuple(float(c) for c in dv) for dv in (grid or ((-1.0,), (1.0,)))
    )
    ns = tuple(range(max(2, t // 5), t // 2 + 1, max(1, t // 20)))
    budget = attempt_budget if attempt_budget is not None else max(reps * 10, 50)
    common = (model, p, t, T_cond, seed, 0, directions, ns)

    collected = []
    attempts = 0
    done = False
    for start in range(0, budget, _SHAPE_BLOCK):
        stop = min(start + _SHAPE_BLOCK, budget)
        parts = _run_spans(
            _shape_chunk, common, _spans(start, stop, _SHAPE_CHUNK), threads
        )
        for part in parts:
            for item in part:
                attempts += 1
                if item is not None:
                    collected.append(item)
                    if len(collected) == reps:
                        done = True
                        break
            if done:
                break
        if done:
            break
    if len(collected) < reps:
        raise InsufficientSurvivals(
            f"only {len(collected)} of {reps} conditioned replicas obtained "
            f"in {attempts} attempts"
        )
    lo_samples = np.array([c[0] for c in collected])
    hi_samples = np.array([c[1] for c in collected])
    mu_hat = {}
    for dvec in directions:
        vals = [c[3][dvec] for c in collected if c[3][dvec] is not None]
        mu_hat[dvec] = Estimate.from_samples(vals) if vals else None
    return ShapeEstimate(
        p=p, t=t, T_cond=T_cond, seed=seed, reps=reps, attempts=attempts,
        directions=directions, mu_hat=mu_hat,
        u_lo=Estimate.from_samples(lo_samples),
        u_hi=Estimate.from_samples(hi_samples),
        lo_samples=lo_samples, hi_samples=hi_samples,
        supports=[c[2] for c in collected],
    )


# ---------------------------------------------------------------------------
# edge speeds (d = 2)

_EDGE_CHUNK = 8


def _edge_chunk(common, span):
    model, p, T, side, margin, master, lane = common
    seeds = _rep_seeds(master, lane, *span)
    trunc = int(math.ceil(model.gamma * T * (1 + margin))) + 1
    res = batch_evolve(
        model, seeds, p, T, init=half_slab_init(model, side, trunc),
        edge="max" if side == "right" else "min",
    )
    return res.edges


@dataclass
class EdgeSpeeds:
    """Frontier speed estimates with the per-time diagnostic bounds.

    ``alpha_upper`` is min over t of mean r_t/t (an upper bound on the right
    speed by subadditivity); ``beta_lower`` is the symmetric max for the
    left frontier.
    """

    alpha: Estimate
    beta: Estimate
    alpha_upper: float
    beta_lower: float
    r_T: np.ndarray
    l_T: np.ndarray
    p: float
    T: int
    reps: int
    seed: int


def edge_speeds(model: NormalizedModel, p, T: int, reps: int, seed: int,
                threads: int = 1, margin: float = 0.2) -> EdgeSpeeds:
    """Mean frontier displacement per step for both half-slab processes.

    Both sides run on the same per-replica fields, so differences of speeds
    across p or across sides are positively coupled.
    """
    if model.d != 2:
        raise DimensionNot2("edge speeds are defined for d = 2 only")

    def side_edges(side):
        return np.concatenate(_run_chunks(
            _edge_chunk, (model, p, T, side, margin, seed, 0), reps,
            _EDGE_CHUNK, threads,
        ))

    def reduce(edges, minimise):
        vT = edges[:, T]
        valid = vT != EDGE_NONE
        if not valid.any():
            raise InsufficientSurvivals(
                "every half-slab replica died before the horizon"
            )
        est = Estimate.from_samples(vT[valid] / T)
        e = edges.astype(float)
        e[edges == EDGE_NONE] = np.nan
        with np.errstate(invalid="ignore"):
            col = np.nansum(e[:, 1:], axis=0)
            cnt = np.sum(~np.isnan(e[:, 1:]), axis=0)
        ok = cnt > 0
        ratios = (col[ok] / cnt[ok]) / np.arange(1, T + 1)[ok]
        diag = float(ratios.min() if minimise else ratios.max())
        return est, diag, vT

    alpha, alpha_upper, r_T = reduce(side_edges("right"), minimise=True)
    beta, beta_lower, l_T = reduce(side_edges("left"), minimise=False)
    return EdgeSpeeds(
        alpha=alpha, beta=beta, alpha_upper=alpha_upper, beta_lower=beta_lower,
        r_T=r_T, l_T=l_T, p=p, T=T, reps=reps, seed=seed,
    )


# ---------------------------------------------------------------------------
# extinction-time tails

def _fit_line(x: np.ndarray, y: np.ndarray):
    """Least-squares line with slope standard error and R^2."""
    n = x.size
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(((y - pred) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1 - ss_res / ss_tot
    sxx = float(((x - x.mean()) ** 2).sum())
    se = math.sqrt(ss_res / (n - 2) / sxx) if n > 2 and sxx > 0 else 0.0
    return float(slope), float(intercept), r2, se


@dataclass
class DeathBoundFit:
    """Log-linear fit of the finite-extinction-time tail over a window."""

    slope: float
    slope_stderr: float
    intercept: float
    r2: float
    n_deaths: int                # deaths inside the window
    counts: dict                 # t -> count of t <= tau <= T
    p: float
    T: int
    reps: int
    window: tuple[int, int]
    seed: int


def death_bound_fit(model: NormalizedModel, p, T: int, reps: int,
                    window: tuple[int, int], seed: int, threads: int = 1,
                    floor: int = 50) -> DeathBoundFit:
    """Slope of log P(t <= tau < infinity) over the window.

    Extinction by the horizon counts as finite; tau > T is censored out of
    the event, which biases the tail slightly low but leaves the slope of
    the log-tail nearly unchanged over windows well below T.
    """
    w0, w1 = int(window[0]), int(window[1])
    if not 1 <= w0 < w1 <= T:
        raise EstimatorError(f"window {window} must satisfy 1 <= a < b <= T")
    sc = survival_curve(model, p, T, reps, seed, threads=threads)
    ts = np.arange(w0, w1 + 1)
    finite = sc.taus[sc.taus >= 0]
    tails = np.array([(finite >= t).sum() for t in ts])
    n_deaths = int(tails[0] - (finite > w1).sum())
    keep = tails > 0
    if n_deaths < floor or keep.sum() < 3:
        raise InsufficientDeaths(
            f"{n_deaths} deaths in window [{w0}, {w1}] "
            f"(floor {floor}, {int(keep.sum())} support points)"
        )
    slope, intercept, r2, se = _fit_line(
        ts[keep].astype(float), np.log(tails[keep] / reps)
    )
    return DeathBoundFit(
        slope=slope, slope_stderr=se, intercept=intercept, r2=r2,
        n_deaths=n_deaths,
        counts={int(t): int(c) for t, c in zip(ts, tails)},
        p=p, T=T, reps=reps, window=(w0, w1), seed=seed,
    )


_DECAY_CHUNK = 4096


def _decay_chunk(common, span):
    model, p, T, master, lane = common
    seeds = _rep_seeds(master, lane, *span)
    res = batch_evolve(model, seeds, p, T, compact=True)
    tau_eff = np.where(res.extinction < 0, T + 1, res.extinction)
    # integer histogram so the merge over chunks is exact in any order
    return np.bincount(tau_eff, minlength=T + 2)


@dataclass
class SubcriticalDecay:
    """Exponential decay rate of P(tau >= t), fitted over trailing windows."""

    c_hat: float                 # fit over the union of the windows
    window_fits: list            # (window, c_window, survivors at window end)
    histogram: np.ndarray        # counts of tau; index T+1 collects tau > T
    p: float
    T: int
    reps: int
    seed: int

    def survival_function(self, t: int) -> float:
        """Empirical P(tau >= t); replicas alive at T count as tau > T."""
        return float(self.histogram[t:].sum() / self.reps)


def subcritical_decay(model: NormalizedModel, p, T: int, reps: int, seed: int,
                      threads: int = 1,
                      windows=((40, 60), (60, 80)),
                      floor: int = 50) -> SubcriticalDecay:
    b_max = max(b for _, b in windows)
    if b_max > T:
        raise EstimatorError(f"windows {windows} must end at or before T={T}")
    hist = sum(_run_chunks(
        _decay_chunk, (model, p, T, seed, 0), reps, _DECAY_CHUNK, threads,
    ))
    tail = np.cumsum(hist[::-1])[::-1]

    def fit(a, b):
        ts = np.arange(a, b + 1)
        surv = tail[a:b + 1]
        if surv[-1] < floor:
            raise InsufficientSurvivals(
                f"only {int(surv[-1])} replicas with tau >= {b} (floor {floor})"
            )
        slope, _, _, _ = _fit_line(ts.astype(float), np.log(surv / reps))
        return -slope, int(surv[-1])

    window_fits = []
    for a, b in windows:
        c_w, n_w = fit(int(a), int(b))
        window_fits.append(((int(a), int(b)), c_w, n_w))
    a0 = min(a for a, _ in windows)
    c_hat, _ = fit(int(a0), int(b_max))
    return SubcriticalDecay(
        c_hat=c_hat, window_fits=window_fits, histogram=hist,
        p=p, T=T, reps=reps, seed=seed,
    )


# ---------------------------------------------------------------------------
# torus extinction

_TORUS_CHUNK = 256


def _torus_chunk(common, span):
    model, p, n, T_max, master, lane = common
    seeds = _rep_seeds(master, lane, *span)
    return torus_extinction_batch(model, p, seeds, n, T_max).extinction


@dataclass
class TorusSizeStats:
    n: int
    mean_tau: Estimate
    uncensored: int
    censored: int
    ks_distance: float | None    # supercritical mode
    ratio_log: float | None      # subcritical mode: mean / log n
    taus: np.ndarray


@dataclass
class TorusStats:
    """Extinction-time statistics of the full-start torus dynamics."""

    regime: str
    per_size: list
    slope_vs_log: float | None   # subcritical: slope of mean tau vs log n
    p: float
    reps: int
    T_max: int
    seed: int


def torus_stats(model: NormalizedModel, p, sizes, reps: int, T_max: int,
                seed: int, threads: int = 1, regime: str = "auto",
                min_uncensored: int | None = None) -> TorusStats:
    if regime not in ("auto", "sub", "super"):
        raise EstimatorError(f"unknown regime {regime!r}")
    if regime == "auto":
        pre = survival_curve(model, p, 100, 200, seed, threads=threads, lane=9)
        regime = "super" if pre.estimate.mean >= 0.2 else "sub"
    floor = min_uncensored if min_uncensored is not None else max(10, reps // 2)
    per_size = []
    for j, n in enumerate(sizes):
        ext = np.concatenate(_run_chunks(
            _torus_chunk, (model, p, int(n), T_max, seed, 16 + j), reps,
            _TORUS_CHUNK, threads,
        ))
        taus = ext[ext >= 0].astype(float)
        if taus.size < floor:
            raise CensoredMean(
                f"torus size {n}: only {taus.size} of {reps} replicas died "
                f"by T_max={T_max}; cannot estimate the mean"
            )
        est = Estimate.from_samples(taus)
        ks = ratio = None
        if regime == "super":
            ks = float(stats.kstest(taus / taus.mean(), "expon").statistic)
        else:
            ratio = est.mean / math.log(n)
        per_size.append(TorusSizeStats(
            n=int(n), mean_tau=est, uncensored=int(taus.size),
            censored=int(reps - taus.size), ks_distance=ks, ratio_log=ratio,
            taus=taus,
        ))
    slope = None
    if regime == "sub" and len(per_size) >= 2:
        xs = np.log([s.n for s in per_size])
        ys = [s.mean_tau.mean for s in per_size]
        slope = float(np.polyfit(xs, ys, 1)[0])
    return TorusStats(
        regime=regime, per_size=per_size, slope_vs_log=slope,
        p=p, reps=reps, T_max=T_max, seed=seed,
    )


# ---------------------------------------------------------------------------
# density spectrum

_DENSITY_CHUNK = 8


def _density_chunk(common, span):
    model, p, n, T_inf, master, lane = common
    d_s = model.d - 1
    R = model.R
    ext = (2 * n,) * d_s
    anchor = (-n,) * d_s
    # one batch entry per site of the box, all on the same replica seed
    n_sites = R * int(np.prod(ext))
    rows = np.zeros((n_sites,) + (R,) + ext, dtype=bool)
    k = 0
    for s in range(R):
        for pos in np.ndindex(ext):
            rows[(k, s) + pos] = True
            k += 1
    out = []
    for i in range(*span):
        si = _rep_seeds(master, lane, i, i + 1)[0]
        res = batch_evolve(
            model, [si] * n_sites, p, T_inf, init=(anchor, rows.copy()),
            dual=True, compact=True,
        )
        out.append(float(res.alive_at_T.mean()))
    return np.array(out)


@dataclass
class DensitySpectrum:
    """Samples of the box density of deep dual survivors."""

    mean: Estimate
    samples: np.ndarray
    freq_le: dict                # a -> empirical P(Y_n <= a)
    histogram: tuple             # (counts, bin edges)
    p: float
    n: int
    T_inf: int
    reps: int
    seed: int


def density_spectrum(model: NormalizedModel, p, n: int, T_inf: int, reps: int,
                     seed: int, threads: int = 1,
                     a_values=()) -> DensitySpectrum:
    """Y_n = fraction of sites of B_n whose dual survives to depth T_inf."""
    if T_inf < 10:
        raise EstimatorError("T_inf must be at least 10")
    samples = np.concatenate(_run_chunks(
        _density_chunk, (model, p, n, T_inf, seed, 0), reps,
        _DENSITY_CHUNK, threads,
    ))
    freq_le = {
        float(a): float((samples <= a).mean()) for a in a_values
    }
    counts, edges = np.histogram(samples, bins=10, range=(0.0, 1.0))
    return DensitySpectrum(
        mean=Estimate.from_samples(samples), samples=samples, freq_le=freq_le,
        histogram=(counts, edges), p=p, n=n, T_inf=T_inf, reps=reps, seed=seed,
    )


# ---------------------------------------------------------------------------
# box crossing

def _crossing_source_window(model: NormalizedModel, g: BlockGeometry,
                            shift: Fraction, half: bool):
    """Initial slab window of every source that can enter the box.

    The truncation is exact: a source outside the window cannot place any
    site inside the box by the per-step displacement bounds.
    """
    v, w = g.v[0], g.w[0]
    mn, mx = model.spatial_min[0], model.spatial_max[0]
    los, his = [], []
    for t in range(g.h + 1):
        los.append(v * t - w + shift - t * mx)
        his.append(v * t + w + shift - t * mn)
    lo = math.floor(min(los))
    hi = math.ceil(max(his)) + 1
    if half:
        hi = min(hi, 1)
    if lo >= hi:
        return None
    return slab_window_rows(model, (lo,), (hi,))


_CROSS_CHUNK = 64


def _crossing_chunk(common, span):
    model, p, L, w, slope, shift, half, master, lane = common
    # box height L+R so the top chain row [L, L+R) lies inside the domain
    g = BlockGeometry((w,), L + model.R, (slope,))
    init = _crossing_source_window(model, g, shift, half)
    n = span[1] - span[0]
    if init is None:
        return np.zeros(n, dtype=bool)
    seeds = _rep_seeds(master, lane, *span)
    res = batch_evolve(
        model, seeds, p, L, init=init,
        domain=BlockDomain(TranslatedBlock(g, (shift, Fraction(0)))),
        compact=True,
    )
    return res.alive_at_T


@dataclass
class CrossingEstimate:
    estimate: Estimate
    outcomes: np.ndarray         # crossing indicator per replica
    p: float
    L: int
    eps: float
    slope: Fraction
    w: int
    seed: int


def crossing_probability(model: NormalizedModel, p, L: int, eps: float,
                         slope, reps: int, seed: int, threads: int = 1,
                         lateral_shift=0) -> CrossingEstimate:
    """Frequency of a bottom-to-top crossing of the tilted box B(eps*L, L, slope)
    by the process started from the truncated half slab {x <= 0}."""
    if model.d != 2:
        raise DimensionNot2("box crossing is defined for d = 2 only")
    slope = as_fraction(slope)
    w = max(1, round(eps * L))
    ev = np.concatenate(_run_chunks(
        _crossing_chunk,
        (model, p, L, w, slope, as_fraction(lateral_shift), True, seed, 0),
        reps, _CROSS_CHUNK, threads,
    ))
    return CrossingEstimate(
        estimate=Estimate.from_bernoulli(ev.sum(), reps), outcomes=ev,
        p=p, L=L, eps=eps, slope=slope, w=w, seed=seed,
    )


# ---------------------------------------------------------------------------
# renormalisation block event

_BG_CHUNK = 16


def _bg_chunk(common, span):
    model, p, g, n, master, lane = common
    regions = bg_target_blocks(g)
    d_s = model.d - 1
    out = []
    for i in range(*span):
        si = _rep_seeds(master, lane, i, i + 1)[0]
        rng = np.random.default_rng(np.uint64(si))
        t = int(rng.integers(0, g.h))
        x = tuple(
            math.ceil(vi * t - wi) + int(rng.integers(0, 2 * wi))
            for vi, wi in zip(g.v, g.w)
        )
        init = slab_window_rows(
            model, tuple(c - n for c in x), tuple(c + n for c in x)
        )
        success = False

        def scan(step_t, state: BatchState):
            nonlocal success
            if success:
                return
            s_abs = t + step_t
            if not 7 * g.h <= s_abs < 8 * g.h:
                return
            if any(e == 0 for e in state.rows.shape[2:]):
                return
            col = state.rows[0].all(axis=0)
            full = ndimage.minimum_filter(
                col.astype(np.uint8), size=2 * n, mode="constant", cval=0
            ).astype(bool)
            if not full.any():
                return
            pos = np.nonzero(full)
            coords = [pp + a for pp, a in zip(pos, state.anchor)]
            hit = regions.target_plus.mask(coords, s_abs)
            hit |= regions.target_minus.mask(coords, s_abs)
            if hit.any():
                success = True

        batch_evolve(
            model, [si], p, 8 * g.h - t, init=init, t0=t,
            domain=BlockDomain(regions.envelope), per_step=scan,
        )
        out.append(success)
    return np.array(out, dtype=bool)


@dataclass
class BlockEventEstimate:
    estimate: Estimate
    outcomes: np.ndarray         # event indicator per replica
    geometry: BlockGeometry
    n: int
    p: float
    reps: int
    seed: int


def bg_event_probability(model: NormalizedModel, p, g: BlockGeometry, n: int,
                         reps: int, seed: int,
                         threads: int = 1) -> BlockEventEstimate:
    """Frequency that a uniformly placed box (x,t)+B_n, run inside the
    envelope B(4w, 8h, v), fully infects a translated box in one of the two
    displaced target blocks."""
    if g.spatial_dim != model.d - 1:
        raise GeometryInvalid("block geometry dimension does not match model")
    if n >= min(g.w):
        raise GeometryInvalid(f"need n < min(w): n={n}, w={g.w}")
    if g.h <= model.R:
        raise GeometryInvalid(f"need block height > R: h={g.h}, R={model.R}")
    ev = np.concatenate(_run_chunks(
        _bg_chunk, (model, p, g, n, seed, 0), reps, _BG_CHUNK, threads,
    ))
    return BlockEventEstimate(
        estimate=Estimate.from_bernoulli(ev.sum(), reps), outcomes=ev,
        geometry=g, n=n, p=p, reps=reps, seed=seed,
    )


# ---------------------------------------------------------------------------
# good blocks

def _grid_occupancy(anchor, rows, zlo, shape):
    """Embed a state's rows into the fixed grid [zlo, zlo+shape)."""
    lead = rows.shape[: rows.ndim - len(shape)]
    out = np.zeros(lead + shape, dtype=bool)
    src, dst = [], []
    for a, e, l, w in zip(anchor, rows.shape[len(lead):], zlo, shape):
        s0, s1 = max(l - a, 0), min(l + w - a, e)
        if s0 >= s1:
            return out
        src.append(slice(s0, s1))
        dst.append(slice(s0 + a - l, s1 + a - l))
    lead_sl = (slice(None),) * len(lead)
    out[lead_sl + tuple(dst)] = rows[lead_sl + tuple(src)]
    return out


_GOOD_CHUNK = 4


def _good_chunk(common, span):
    model, p, L, C, v, master, lane = common
    R = model.R
    d_s = model.d - 1
    thr = L // C
    s_time = C * L + thr
    region_g = BlockGeometry((3 * L,) * d_s, R, v)
    probe_g = BlockGeometry((max(1, thr),) * d_s, R, v)

    # fixed comparison grid covering every region this event touches
    bounds_lo = [math.inf] * d_s
    bounds_hi = [-math.inf] * d_s
    for off_t in (C * L, s_time):
        for ax in range(d_s):
            centre = v[ax] * off_t
            lo_c = centre - 3 * L + min(0, (R - 1) * v[ax])
            hi_c = centre + 3 * L + max(0, (R - 1) * v[ax])
            side = L + max(1, thr) if ax == d_s - 1 else 0
            bounds_lo[ax] = min(bounds_lo[ax], lo_c - side)
            bounds_hi[ax] = max(bounds_hi[ax], hi_c + side)
    zlo = tuple(math.floor(b) - 1 for b in bounds_lo)
    zhi = tuple(math.ceil(b) + 2 for b in bounds_hi)
    shape = tuple(h - l for l, h in zip(zlo, zhi))

    grids = np.indices((R,) + shape, dtype=np.int64)
    r_grid = grids[0]
    z_grid = [g_ + l for g_, l in zip(grids[1:], zlo)]

    def region_mask(block_g, off_spatial):
        tb = TranslatedBlock(block_g, tuple(off_spatial) + (Fraction(0),))
        return tb.mask(z_grid, r_grid)

    # initial window for the slab runs, valid for both snapshot times
    mn, mx = model.spatial_min, model.spatial_max
    slo = tuple(
        min(l - s_time * x, l - C * L * x) for l, x in zip(zlo, mx)
    )
    shi = tuple(
        max(h - s_time * x, h - C * L * x) for h, x in zip(zhi, mn)
    )

    out = []
    for i in range(*span):
        si = _rep_seeds(master, lane, i, i + 1)[0]
        e1 = e2 = True
        e3 = False
        for u in range(R):
            t0 = u - R + 1
            # all sites (x, u) of the block's slab row u
            xranges = [
                range(math.ceil(vi * u - L), math.ceil(vi * u - L) + 2 * L)
                for vi in v
            ]
            sites = list(product(*xranges))
            B = len(sites)
            anchor = tuple(r[0] for r in xranges)
            ext = (2 * L,) * d_s
            rows = np.zeros((B, R) + ext, dtype=bool)
            for k, site in enumerate(sites):
                rel = tuple(c - a for c, a in zip(site, anchor))
                rows[(k, R - 1) + rel] = True
            res = batch_evolve(
                model, [si] * B, p, s_time, init=(anchor, rows), t0=t0,
                snapshot_times=[C * L, s_time],
            )
            tau = res.extinction
            alive_long = (tau < 0) | (tau >= thr)
            if ((tau >= thr) & (tau >= 0) & (tau < s_time)).any():
                e1 = False
            res_s = batch_evolve(
                model, [si], p, s_time, init=slab_window_rows(model, slo, shi),
                t0=t0, snapshot_times=[C * L, s_time],
            )
            for off_t in (C * L, s_time):
                reg = region_mask(region_g, tuple(vi * off_t for vi in v))
                snap = res.snapshots[off_t]
                occ = _grid_occupancy(snap.anchor, snap.rows, zlo, shape)
                snap_s = res_s.snapshots[off_t]
                occ_s = _grid_occupancy(snap_s.anchor, snap_s.rows[0], zlo, shape)
                mismatch = (occ != occ_s[None]) & reg[None]
                if mismatch[alive_long].any():
                    e2 = False
            if u == R - 1:
                # probe blocks against the untranslated slab run (t0 = 0)
                snap_s = res_s.snapshots[s_time]
                occ_s = _grid_occupancy(snap_s.anchor, snap_s.rows[0], zlo, shape)
                hit_both = True
                for sgn in (1, -1):
                    off_sp = [vi * s_time for vi in v]
                    off_sp[d_s - 1] += sgn * L
                    if not (occ_s & region_mask(probe_g, off_sp)).any():
                        hit_both = False
                e3 = hit_both
        out.append((e1, e2, e3))
    return out


@dataclass
class GoodBlockEstimate:
    estimate: Estimate           # all three events hold
    event1: Estimate             # extinction-time dichotomy
    event2: Estimate             # coupled-region containments
    event3: Estimate             # displaced probe blocks reached
    events: list                 # per replica (e1, e2, e3)
    p: float
    L: int
    C: int
    v: tuple
    reps: int
    seed: int


def good_block_probability(model: NormalizedModel, p, L: int, C: int,
                           reps: int, seed: int, threads: int = 1,
                           v=None) -> GoodBlockEstimate:
    """Frequency of the three-part good-block event at scale (L, C).

    Event 1: every site of the block's base slab either dies before L/C or
    survives to s = C*L + L/C.  Event 2: long-surviving sites agree with the
    full-slab process on the 3L-block at times C*L and s.  Event 3: the
    full-slab state at time s meets both probe blocks displaced by +-L on
    the last spatial axis.
    """
    if C < 2:
        raise GeometryInvalid("need C >= 2")
    if L < C or L % C != 0:
        raise GeometryInvalid(f"need C | L and L >= C; got L={L}, C={C}")
    v = tuple(
        as_fraction(c) for c in (v if v is not None else (0,) * (model.d - 1))
    )
    if len(v) != model.d - 1:
        raise GeometryInvalid("tilt vector has wrong dimension")
    parts = _run_chunks(
        _good_chunk, (model, p, L, C, v, seed, 0), reps, _GOOD_CHUNK, threads,
    )
    flat = [item for part in parts for item in part]
    good = sum(1 for e1, e2, e3 in flat if e1 and e2 and e3)
    return GoodBlockEstimate(
        estimate=Estimate.from_bernoulli(good, reps),
        event1=Estimate.from_bernoulli(sum(e[0] for e in flat), reps),
        event2=Estimate.from_bernoulli(sum(e[1] for e in flat), reps),
        event3=Estimate.from_bernoulli(sum(e[2] for e in flat), reps),
        events=flat, p=p, L=L, C=C, v=v, reps=reps, seed=seed,
    )


# ---------------------------------------------------------------------------
# primal-dual meeting

def _states_intersect(a: BatchState, b: BatchState) -> bool:
    ra, rb = a.rows[0], b.rows[0]
    if not (ra.any() and rb.any()):
        return False
    lo = tuple(max(x, y) for x, y in zip(a.anchor, b.anchor))
    hi = tuple(
        min(x + e, y + f)
        for x, e, y, f in zip(a.anchor, ra.shape[1:], b.anchor, rb.shape[1:])
    )
    if any(l >= h for l, h in zip(lo, hi)):
        return False
    sla = tuple(slice(l - x, h - x) for l, h, x in zip(lo, hi, a.anchor))
    slb = tuple(slice(l - y, h - y) for l, h, y in zip(lo, hi, b.anchor))
    return bool((ra[(slice(None),) + sla] & rb[(slice(None),) + slb]).any())


_MEET_CHUNK = 32


def _meet_chunk(common, span):
    model, p, t, z, master, lane = common
    out = []
    for i in range(*span):
        si = _rep_seeds(master, lane, i, i + 1)[0]
        sp, sd = spawn_seed(si, 0), spawn_seed(si, 1)
        rp = batch_evolve(model, [sp], p, t, snapshot_times=[t])
        rd = batch_evolve(
            model, [sd], p, t, init=rows_from_sites(model, [z + (0,)]),
            t0=2 * t, dual=True, snapshot_times=[t],
        )
        both = bool(rp.alive_at_T[0] and rd.alive_at_T[0])
        meet = both and _states_intersect(rp.snapshots[t], rd.snapshots[t])
        out.append((both, both and not meet))
    return out


@dataclass
class MeetEstimate:
    """Failure frequency of the primal-dual meeting event.

    The dual starts at the rounded displacement z = round(2t * v_hat) (ties
    toward minus infinity) at absolute time 2t; row s of the dual at depth t
    sits at absolute time t+s, so the two slab states are compared directly.
    """

    failure: Estimate            # both alive at t, supports disjoint
    events: list                 # per replica (both alive, failure)
    both_alive: int
    z: tuple[int, ...]
    v_hat: tuple
    p: float
    t: int
    reps: int
    seed: int


def primal_dual_meet(model: NormalizedModel, p, t: int, reps: int, v_hat,
                     seed: int, threads: int = 1) -> MeetEstimate:
    v_hat = tuple(as_fraction(c) for c in v_hat)
    if len(v_hat) != model.d - 1:
        raise EstimatorError("v_hat has wrong dimension")
    # nearest integer with ties toward minus infinity
    z = tuple(math.ceil(2 * t * c - Fraction(1, 2)) for c in v_hat)
    parts = _run_chunks(
        _meet_chunk, (model, p, t, z, seed, 0), reps, _MEET_CHUNK, threads,
    )
    flat = [item for part in parts for item in part]
    return MeetEstimate(
        failure=Estimate.from_bernoulli(sum(f for _, f in flat), reps),
        events=flat, both_alive=sum(b for b, _ in flat),
        z=z, v_hat=v_hat, p=p, t=t, reps=reps, seed=seed,
    )


# ---------------------------------------------------------------------------
# restricted-cone survival

def _interval_bounds(polytope: ConvexPolytope):
    """Lower/upper bounds of a one-dimensional polytope."""
    lo = hi = None
    for (a,), b in polytope.halfspaces:
        if a > 0:
            bound = b / a
            hi = bound if hi is None else min(hi, bound)
        elif a < 0:
            bound = b / a
            lo = bound if lo is None else max(lo, bound)
    return lo, hi


_CONE_CHUNK = 64


def _cone_chunk(common, span):
    model, p, polytope, T, t0, master, lane = common
    R = model.R
    o_lo, o_hi = _interval_bounds(polytope)
    sites = []
    for s in range(R):
        t_abs = t0 + s
        x0 = math.floor(o_lo * t_abs) - 1
        x1 = math.ceil(o_hi * t_abs) + 2
        for x in range(x0, x1):
            if polytope.contains_point((Fraction(x, t_abs),)):
                sites.append((x, s))
    init = rows_from_sites(model, sites)
    seeds = _rep_seeds(master, lane, *span)
    res = batch_evolve(
        model, seeds, p, T - t0, init=init, t0=t0,
        domain=ConeDomain(polytope), compact=True,
    )
    return res.alive_at_T


@dataclass
class ConeSurvival:
    estimate: Estimate
    outcomes: np.ndarray         # survival indicator per replica
    bounds: tuple[float, float]
    shape_interval: tuple[float, float]
    p: float
    T: int
    t0: int
    reps: int
    seed: int


def restricted_cone_survival(model: NormalizedModel, p, polytope, T: int,
                             reps: int, seed: int, threads: int = 1,
                             t0: int = 50, shape=None,
                             margin: float = 0.02) -> ConeSurvival:
    """Frequency that some start site of the cone over the polytope, in the
    time window [t0, t0+R), percolates within the cone to time T.

    Start-window policy: start sites are exactly the cone's lattice sites in
    that window and are exempt from the openness/domain requirement, like
    any path start.  Refuses unless the polytope lies inside the shape
    interval with the given margin.
    """
    if model.d != 2:
        raise DimensionNot2("cone survival is implemented for d = 2")
    if not 0 < t0 < T:
        raise EstimatorError("need 0 < t0 < T")
    if isinstance(polytope, (tuple, list)):
        polytope = ConvexPolytope.interval(*polytope)
    o_lo, o_hi = _interval_bounds(polytope)
    if o_lo is None or o_hi is None or o_lo > o_hi:
        raise EstimatorError("polytope must be a bounded non-empty interval")
    if shape is None:
        shape = shape_and_time_constants(
            model, p, min(400, max(T, 50)), 40,
            seed=spawn_seed(seed, 7), threads=threads,
        )
    u_lo, u_hi = (
        shape.u_hat if isinstance(shape, ShapeEstimate) else tuple(shape)
    )
    if not (u_lo + margin <= float(o_lo) and float(o_hi) <= u_hi - margin):
        raise ConeOutsideShape(
            f"cone [{float(o_lo):.3f}, {float(o_hi):.3f}] is not inside the "
            f"shape interval [{u_lo:.3f}, {u_hi:.3f}] with margin {margin}"
        )
    ev = np.concatenate(_run_chunks(
        _cone_chunk, (model, p, polytope, T, t0, seed, 0), reps,
        _CONE_CHUNK, threads,
    ))
    return ConeSurvival(
        estimate=Estimate.from_bernoulli(ev.sum(), reps), outcomes=ev,
        bounds=(float(o_lo), float(o_hi)), shape_interval=(u_lo, u_hi),
        p=p, T=T, t0=t0, reps=reps, seed=seed,
    )


# ---------------------------------------------------------------------------
# path crossing and sprinkled transfer

def box_infection_probe(model: NormalizedModel, n: int = 1,
                        t_max: int = 12) -> tuple[int, tuple[int, ...], int]:
    """Smallest t (then closest v) with v + [-n, n)^{d-1} inside the t-fold
    sumset of the spatial steps; at p=1 a site infects that whole box t
    steps later."""
    if any(u != 1 for _, u in model.split_offsets):
        raise EstimatorError("box infection probe requires a range-1 model")
    d_s = model.d - 1
    steps = [y for y, _ in model.split_offsets]
    box = list(product(*[range(-n, n)] * d_s))
    current = {(0,) * d_s}
    for t in range(1, t_max + 1):
        current = {
            tuple(a + b for a, b in zip(x, y)) for x in current for y in steps
        }
        for cand in sorted(current, key=lambda z: (max(map(abs, z)), z)):
            if all(
                tuple(ci + bi for ci, bi in zip(cand, b)) in current
                for b in box
            ):
                return n, cand, t
    raise EstimatorError(f"no box infection parameters found up to t={t_max}")


def _leftmost_path(model: NormalizedModel, snapshots, L: int):
    """Leftmost bottom-to-top open path from stored range-1 states.

    Keeps only sites that are co-reachable from the top, then greedily takes
    the smallest admissible successor; this is the lexicographically least
    crossing path, a deterministic witness choice.
    """
    ys = sorted(y[0] for y, _ in model.split_offsets)
    occ = []
    for t in range(L + 1):
        st = snapshots[t]
        row = st.rows[0, 0]
        occ.append({int(st.anchor[0] + j) for j in np.flatnonzero(row)})
    co = [set() for _ in range(L + 1)]
    co[L] = occ[L]
    for t in range(L - 1, -1, -1):
        nxt = co[t + 1]
        co[t] = {x for x in occ[t] if any(x + y in nxt for y in ys)}
    if not co[0]:
        return None
    a = min(co[0])
    path = [(a, 0)]
    for t in range(1, L + 1):
        a = min(a + y for y in ys if a + y in co[t])
        path.append((a, t))
    return path


def _transfer_bfs(model, seed, p, eps, gam, gam2, probe, L) -> bool:
    """Can the sprinkled field connect the start of gamma to the end of
    gamma-prime through gamma, gamma-prime and extra sites near gamma?"""
    n_pr, v_pr, t_pr = probe
    v0 = v_pr[0]
    fld = FieldSpec(seed, p, sprinkle_eps=eps)
    ys = sorted(y[0] for y, _ in model.split_offsets)
    core = defaultdict(set)
    for x, t in gam:
        core[t].add(x)
    for x, t in gam2:
        core[t].add(x)
    band = defaultdict(list)
    rad = n_pr + abs(v0) + t_pr * max(1, model.dilation(1))
    for x, ta in gam:
        for j in range(1, t_pr + 1):
            if ta + j <= L:
                band[ta + j].append((x - rad, x + rad))
    target = gam2[-1][0]
    frontier = {gam[0][0]}
    for t in range(1, L + 1):
        nxt = set()
        for x in frontier:
            for y in ys:
                z = x + y
                if z in nxt:
                    continue
                if z in core[t]:
                    nxt.add(z)
                elif eps > 0 and any(
                    lo <= z <= hi for lo, hi in band.get(t, ())
                ) and fld.extra_open((z, t)):
                    nxt.add(z)
        if not nxt:
            return False
        frontier = nxt
    return target in frontier


_TRANSFER_CHUNK = 8


def _transfer_chunk(common, span):
    model, p, eps, L, w, alpha, beta, shift, probe, master, lane = common
    out = []
    for i in range(*span):
        si = _rep_seeds(master, lane, i, i + 1)[0]
        paths = []
        for slope, off in ((alpha, -shift), (beta, shift)):
            g = BlockGeometry((w,), L + 1, (slope,))
            init = _crossing_source_window(model, g, Fraction(off), half=False)
            if init is None:
                paths = None
                break
            res = batch_evolve(
                model, [si], p, L, init=init,
                domain=BlockDomain(TranslatedBlock(g, (Fraction(off), Fraction(0)))),
                snapshot_times=range(L + 1),
            )
            if not res.alive_at_T[0]:
                paths = None
                break
            path = _leftmost_path(model, res.snapshots, L)
            if path is None:
                paths = None
                break
            paths.append(path)
        if paths is None:
            out.append(None)
            continue
        gam, gam2 = paths
        g2set = set(gam2)
        path_meet = bool(set(gam) & g2set)
        n_pr, v_pr, t_pr = probe
        hat = {
            (x + v_pr[0] + b, ta + t_pr)
            for x, ta in gam for b in range(-n_pr, n_pr)
        }
        hat_meet = bool(hat & g2set)
        transfer = _transfer_bfs(model, si, p, eps, gam, gam2, probe, L)
        out.append((path_meet, hat_meet, transfer))
    return out


@dataclass
class TransferResult:
    """Crossing-path statistics of the two tilted boxes under sprinkling.

    ``records`` holds one entry per replica: None when at least one box was
    not crossed, else (paths share a vertex, thickened path meets the other
    path, sprinkled transfer connects start to end).
    """

    crossing: Estimate           # both boxes crossed
    transfer: Estimate           # transfer success among crossing replicas
    path_meets: int
    hat_meets: int
    crossed: int
    records: list
    probe: tuple
    p: float
    eps: float
    L: int
    reps: int
    seed: int


def path_crossing_transfer(model: NormalizedModel, p, eps: float, L: int,
                           reps: int, seed: int, threads: int = 1,
                           alpha=None, beta=None, shift=None,
                           half_width=None, probe=None) -> TransferResult:
    """Sample fields where both tilted boxes are crossed, extract leftmost
    crossing paths and test the sprinkled start-to-end transfer.

    The first box has slope ``alpha`` shifted left by ``shift``, the second
    slope ``beta`` shifted right; both have half-width ``half_width``
    (default eps*L).
    """
    if model.d != 2:
        raise DimensionNot2("path transfer is defined for d = 2 only")
    if not 0 <= eps <= 1 - p:
        raise EstimatorError(f"eps must lie in [0, 1-p], got {eps}")
    if alpha is None or beta is None:
        raise EstimatorError("box slopes alpha and beta are required")
    alpha, beta = as_fraction(alpha), as_fraction(beta)
    if half_width is not None:
        w = int(half_width)
    else:
        w = max(1, round(eps * L)) if eps > 0 else max(1, round(0.1 * L))
    shift = 2 * w if shift is None else int(shift)
    probe = probe if probe is not None else box_infection_probe(model)
    parts = _run_chunks(
        _transfer_chunk,
        (model, p, eps, L, w, alpha, beta, shift, probe, seed, 0),
        reps, _TRANSFER_CHUNK, threads,
    )
    records = [item for part in parts for item in part]
    crossed = [r for r in records if r is not None]
    if not crossed:
        raise NoCrossingFound(
            f"no replica crossed both boxes in {reps} attempts"
        )
    return TransferResult(
        crossing=Estimate.from_bernoulli(len(crossed), reps),
        transfer=Estimate.from_bernoulli(
            sum(r[2] for r in crossed), len(crossed)
        ),
        path_meets=sum(r[0] for r in crossed),
        hat_meets=sum(r[1] for r in crossed),
        crossed=len(crossed), records=records, probe=probe,
        p=p, eps=eps, L=L, reps=reps, seed=seed,
    )
