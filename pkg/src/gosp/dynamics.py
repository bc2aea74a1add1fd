"""Evolution of the domain-restricted lattice growth chain and its dual.

The chain lives on the time slab Z^{d-1} x [0, R).  One step shifts the slab
forward: row s of the new state is row s+1 of the old one for s < R-1, and
the new top row contains (x, R-1) iff the space-time site (x, t+R) is open,
lies in the domain, and is reachable by a single step offset from an
occupied site of the old state.

States are dense boolean arrays over a moving spatial window, with a leading
batch axis so that independent replicas (distinct seeds) evolve in lockstep
through the same vectorised kernels.  The single-replica API wraps the
batched engine with batch size one.  All truncations of infinite initial
conditions are justified by the spread bound: influence moves at most
``spatial_min``/``spatial_max`` per axis per step, so a sufficiently dilated
window reproduces the infinite process exactly on the region of interest.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .field import FieldSpec, _as_u64, open_given_hash, site_hash, threshold_for
from .geometry import ConvexPolytope, TranslatedBlock, as_fraction, cone_mask
from .model import NormalizedModel


class DynamicsError(ValueError):
    pass


class OutsideSlab(DynamicsError):
    pass


class DimensionNot2(DynamicsError):
    pass


class TorusTooSmall(DynamicsError):
    pass


class WindowTooSmall(DynamicsError):
    def __init__(self, required):
        self.required = tuple(required)
        super().__init__(
            f"simulation window too small; required initial window {self.required}"
        )


class IrrationalTilt(DynamicsError):
    pass


class MissingSnapshots(DynamicsError):
    pass


# ---------------------------------------------------------------------------
# domains

class Domain:
    """Unrestricted domain; subclasses restrict where paths may step."""

    def mask(self, coords, t):
        """Boolean membership array for sites (coords, t); None = everywhere."""
        return None

    def contains(self, site) -> bool:
        m = self.mask([np.int64(c) for c in site[:-1]], np.int64(site[-1]))
        return True if m is None else bool(m)


FULL = Domain()


@dataclass(frozen=True)
class HalfSpaceDomain(Domain):
    """Sites with sign * x[axis] <= threshold."""

    axis: int
    sign: int
    threshold: int

    def mask(self, coords, t):
        return np.asarray(coords[self.axis]) * self.sign <= self.threshold


@dataclass(frozen=True)
class BlockDomain(Domain):
    block: TranslatedBlock

    def mask(self, coords, t):
        return self.block.mask(coords, t)


@dataclass(frozen=True)
class ConeDomain(Domain):
    region: ConvexPolytope

    def mask(self, coords, t):
        return cone_mask(self.region, coords, t)


@dataclass(frozen=True)
class TubeDomain(Domain):
    """Spatial box [lo_i, hi_i) at all times."""

    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def mask(self, coords, t):
        out = None
        for c, l, h in zip(coords, self.lo, self.hi):
            m = (np.asarray(c) >= l) & (np.asarray(c) < h)
            out = m if out is None else out & m
        return out


# ---------------------------------------------------------------------------
# states

@dataclass
class BatchState:
    """Occupancy of a batch of replicas: rows has shape (B, R, *extent).

    ``t`` counts chain steps from the start of the run; for primal evolution
    it is offset by the start time t0 of the run when querying the field.
    """

    t: int
    anchor: tuple[int, ...]
    rows: np.ndarray

    @property
    def batch(self) -> int:
        return self.rows.shape[0]

    def alive(self) -> np.ndarray:
        return self.rows.any(axis=tuple(range(1, self.rows.ndim)))

    def counts(self) -> np.ndarray:
        return self.rows.sum(axis=tuple(range(1, self.rows.ndim)), dtype=np.int64)


@dataclass
class ProcessState:
    """Single-replica slab occupancy over a bounded window."""

    t: int
    anchor: tuple[int, ...]
    rows: np.ndarray            # bool, shape (R, *extent)

    def is_empty(self) -> bool:
        return not self.rows.any()

    def count(self) -> int:
        return int(self.rows.sum())

    def occupied(self):
        """Iterate occupied slab sites as (x_1, ..., x_{d-1}, s)."""
        for idx in zip(*np.nonzero(self.rows)):
            s, *x = idx
            yield tuple(int(a + c) for a, c in zip(self.anchor, x)) + (int(s),)

    def __contains__(self, site) -> bool:
        *x, s = site
        if not 0 <= s < self.rows.shape[0]:
            return False
        rel = tuple(c - a for c, a in zip(x, self.anchor))
        if any(r < 0 or r >= e for r, e in zip(rel, self.rows.shape[1:])):
            return False
        return bool(self.rows[(s,) + tuple(rel)])


def _window_coords(anchor, shape):
    grids = np.indices(shape, dtype=np.int64)
    return [g + a for g, a in zip(grids, anchor)]


def _trim(rows: np.ndarray, anchor):
    """Shrink the spatial window to the occupied bounding box."""
    d_s = rows.ndim - 2
    if d_s == 0:
        return rows, anchor
    if not rows.any():
        sl = (slice(None), slice(None)) + (slice(0, 0),) * d_s
        return rows[sl], anchor
    lo, hi = [], []
    for ax in range(d_s):
        proj = np.any(rows, axis=tuple(i for i in range(rows.ndim) if i != 2 + ax))
        nz = np.flatnonzero(proj)
        lo.append(int(nz[0]))
        hi.append(int(nz[-1]) + 1)
    sl = (slice(None), slice(None)) + tuple(slice(l, h) for l, h in zip(lo, hi))
    return rows[sl], tuple(a + l for a, l in zip(anchor, lo))


def rows_from_sites(model: NormalizedModel, sites) -> tuple[tuple[int, ...], np.ndarray]:
    """Minimal (anchor, rows) for a finite set of slab sites."""
    R, d_s = model.R, model.d - 1
    sites = [tuple(int(c) for c in s) for s in sites]
    for s in sites:
        if len(s) != d_s + 1:
            raise OutsideSlab(f"site {s} has wrong dimension")
        if not 0 <= s[-1] < R:
            raise OutsideSlab(f"site {s} outside the slab [0, {R})")
    if not sites:
        return (0,) * d_s, np.zeros((R,) + (0,) * d_s, dtype=bool)
    anchor = tuple(min(s[i] for s in sites) for i in range(d_s))
    ext = tuple(max(s[i] for s in sites) - anchor[i] + 1 for i in range(d_s))
    rows = np.zeros((R,) + ext, dtype=bool)
    for s in sites:
        rows[(s[-1],) + tuple(c - a for c, a in zip(s, anchor))] = True
    return anchor, rows


def slab_window_rows(model: NormalizedModel, lo, hi) -> tuple[tuple[int, ...], np.ndarray]:
    """Fully occupied slab over the spatial window [lo_i, hi_i)."""
    ext = tuple(h - l for l, h in zip(lo, hi))
    return tuple(lo), np.ones((model.R,) + ext, dtype=bool)


# ---------------------------------------------------------------------------
# open-site evaluation for batches

def batch_open_fn(seeds, p, sprinkle_eps=None) -> Callable:
    """Per-row openness evaluator: fn(coords, t_abs) -> bool array (B, *shape).

    ``seeds`` is one 64-bit seed per replica.  The sprinkle substream adds
    extra open sites at rate eps/(1-p) so the composite marginal is p+eps.
    """
    su = _as_u64(seeds)
    B = su.shape[0]
    thr = threshold_for(p)
    extra_thr = None
    if sprinkle_eps is not None and sprinkle_eps > 0:
        extra_thr = threshold_for(float(Fraction(sprinkle_eps) / (1 - Fraction(p))))

    def fn(coords, t_abs):
        s = su.reshape((B,) + (1,) * len(coords))
        cs = list(coords) + [np.int64(t_abs)]
        out = open_given_hash(site_hash(s, cs), thr)
        if extra_thr is not None:
            out = out | open_given_hash(site_hash(s, cs, stream=1), extra_thr)
        return out

    return fn


# ---------------------------------------------------------------------------
# stepping kernels

def _batch_step(state: BatchState, model: NormalizedModel, open_fn, domain,
                t0: int) -> BatchState:
    """Primal slab-shift step; the new top row sits at absolute time t0+t+R."""
    R = model.R
    B = state.batch
    mins, maxs = model.spatial_min, model.spatial_max
    ext = state.rows.shape[2:]
    lo = tuple(a + mn for a, mn in zip(state.anchor, mins))
    shape = tuple(e + (mx - mn) for e, mx, mn in zip(ext, maxs, mins))
    acc = np.zeros((B,) + shape, dtype=bool)
    if all(e > 0 for e in ext):
        for y, u in model.split_offsets:
            src = state.rows[:, R - u]
            sl = tuple(
                slice(yi - mn, yi - mn + e) for yi, mn, e in zip(y, mins, ext)
            )
            acc[(slice(None),) + sl] |= src
    t_abs = t0 + state.t + R
    if acc.any():
        coords = _window_coords(lo, shape)
        top = acc & open_fn(coords, t_abs)
        if domain is not None:
            m = domain.mask(coords, t_abs)
            if m is not None:
                top &= m
    else:
        top = acc
    # union window for the shifted old rows and the new top row
    ulo = tuple(min(l, a) for l, a in zip(lo, state.anchor))
    uhi = tuple(
        max(l + s_, a + e) for l, s_, a, e in zip(lo, shape, state.anchor, ext)
    )
    ushape = tuple(h - l for l, h in zip(ulo, uhi))
    rows = np.zeros((B, R) + ushape, dtype=bool)
    if R > 1 and all(e > 0 for e in ext):
        sl = tuple(slice(a - l, a - l + e) for a, l, e in zip(state.anchor, ulo, ext))
        rows[(slice(None), slice(0, R - 1)) + sl] = state.rows[:, 1:]
    sl = tuple(slice(l_ - l, l_ - l + s_) for l_, l, s_ in zip(lo, ulo, shape))
    rows[(slice(None), R - 1) + sl] = top
    rows, anchor = _trim(rows, ulo)
    return BatchState(state.t + 1, anchor, rows)


def _dual_batch_step(state: BatchState, model: NormalizedModel, open_fn, domain,
                     t0: int) -> BatchState:
    """Dual step: extend occupied open sites backwards by one slab row.

    Row r of the dual state at depth tau sits at absolute time t0 - tau + r;
    a site extends only if it is itself open (and in the domain), while newly
    inserted sites carry no openness requirement until they extend in turn.
    """
    R = model.R
    B = state.batch
    mins, maxs = model.spatial_min, model.spatial_max
    ext = state.rows.shape[2:]
    lo = tuple(a - mx for a, mx in zip(state.anchor, maxs))
    shape = tuple(e + (mx - mn) for e, mx, mn in zip(ext, maxs, mins))
    acc = np.zeros((B,) + shape, dtype=bool)
    if all(e > 0 for e in ext) and state.rows.any():
        coords = _window_coords(state.anchor, ext)
        occ_open = np.empty_like(state.rows)
        for r in range(R):
            t_abs = t0 - state.t + r
            m = state.rows[:, r] & open_fn(coords, t_abs)
            if domain is not None:
                dm = domain.mask(coords, t_abs)
                if dm is not None:
                    m = m & dm
            occ_open[:, r] = m
        for y, u in model.split_offsets:
            src = occ_open[:, u - 1]
            sl = tuple(
                slice(mx - yi, mx - yi + e) for yi, mx, e in zip(y, maxs, ext)
            )
            acc[(slice(None),) + sl] |= src
    ulo = tuple(min(l, a) for l, a in zip(lo, state.anchor))
    uhi = tuple(
        max(l + s_, a + e) for l, s_, a, e in zip(lo, shape, state.anchor, ext)
    )
    ushape = tuple(h - l for l, h in zip(ulo, uhi))
    rows = np.zeros((B, R) + ushape, dtype=bool)
    if R > 1 and all(e > 0 for e in ext):
        sl = tuple(slice(a - l, a - l + e) for a, l, e in zip(state.anchor, ulo, ext))
        rows[(slice(None), slice(1, R)) + sl] = state.rows[:, : R - 1]
    sl = tuple(slice(l_ - l, l_ - l + s_) for l_, l, s_ in zip(lo, ulo, shape))
    rows[(slice(None), 0) + sl] = acc
    rows, anchor = _trim(rows, ulo)
    return BatchState(state.t + 1, anchor, rows)


def _torus_batch_step(state: BatchState, model: NormalizedModel, open_fn, n: int,
                      t0: int) -> BatchState:
    R = model.R
    d_s = model.d - 1
    acc = np.zeros_like(state.rows[:, 0])
    axes = tuple(range(1, 1 + d_s))
    for y, u in model.split_offsets:
        acc |= np.roll(state.rows[:, R - u], shift=tuple(y), axis=axes)
    coords = _window_coords((0,) * d_s, (n,) * d_s)
    top = acc & open_fn(coords, t0 + state.t + R)
    rows = np.concatenate([state.rows[:, 1:], top[:, None]], axis=1)
    return BatchState(state.t + 1, state.anchor, rows)


# ---------------------------------------------------------------------------
# batched driver

EDGE_NONE = np.iinfo(np.int64).min


@dataclass
class BatchResult:
    """Summary of a batched run; all arrays are indexed by replica."""

    T: int
    extinction: np.ndarray              # step of first empty state; -1 if none seen
    alive_at_T: np.ndarray
    reached_extent: np.ndarray | None = None
    edges: np.ndarray | None = None     # (B, T+1), EDGE_NONE where empty
    hits: np.ndarray | None = None      # (B, *window), -1 where never hit
    hit_anchor: tuple[int, ...] | None = None
    counts: np.ndarray | None = None    # (B, T+1)
    snapshots: dict[int, BatchState] | None = None


def batch_evolve(model: NormalizedModel, seeds, p, T, *,
                 init: tuple[tuple[int, ...], np.ndarray] | None = None,
                 t0: int = 0, dual: bool = False, domain: Domain | None = None,
                 torus_n: int | None = None, sprinkle_eps=None,
                 stop_extent: int | None = None,
                 edge: str | None = None,
                 hit_window: tuple[Sequence[int], Sequence[int]] | None = None,
                 snapshot_times: Iterable[int] = (),
                 record_counts: bool = False,
                 compact: bool = False,
                 per_step: Callable | None = None) -> BatchResult:
    """Run B replicas for T steps and collect the requested observables.

    ``init`` is a shared (anchor, rows) pair with rows of shape (R, *extent)
    or a per-replica (B, R, *extent) array; default is a single occupied site
    at the origin of row 0.  ``compact`` drops extinct replicas from the
    working arrays (only valid without per-replica probes).
    """
    B = len(seeds)
    d_s = model.d - 1
    if torus_n is not None and torus_n <= 2 * model.gamma * model.R:
        raise TorusTooSmall(
            f"torus side {torus_n} must exceed 2*gamma*R = {2 * model.gamma * model.R}"
        )
    if init is None:
        anchor, rows1 = rows_from_sites(model, [(0,) * d_s + (0,)])
    else:
        anchor, rows1 = init
        anchor = tuple(anchor)
    rows = (
        np.broadcast_to(rows1, (B,) + rows1.shape).copy()
        if rows1.ndim == model.d else np.array(rows1, dtype=bool)
    )
    state = BatchState(0, anchor, rows)
    seeds_u = _as_u64(seeds)
    open_fn = batch_open_fn(seeds_u, p, sprinkle_eps)
    snapshot_times = set(snapshot_times)
    if compact and (edge or hit_window or snapshot_times or stop_extent or per_step):
        raise ValueError("compact mode supports only extinction/count probes")

    extinction = np.full(B, -1, dtype=np.int64)
    reached = np.zeros(B, dtype=bool) if stop_extent is not None else None
    edges = np.full((B, T + 1), EDGE_NONE, dtype=np.int64) if edge else None
    counts = np.zeros((B, T + 1), dtype=np.int64) if record_counts else None
    snapshots = {} if snapshot_times else None
    hits = hit_lo = None
    if hit_window is not None:
        hit_lo = tuple(int(c) for c in hit_window[0])
        hit_shape = tuple(int(h) - int(l) for l, h in zip(hit_window[0], hit_window[1]))
        hits = np.full((B,) + hit_shape, -1, dtype=np.int64)
    if edge and d_s != 1:
        raise DimensionNot2("edge tracking requires d = 2")

    idx = np.arange(B)                  # original replica index of each row
    alive_at_T = np.zeros(B, dtype=bool)

    def probe(t):
        alive = state.alive()
        if t == 0:
            extinction[idx[~alive]] = 0
        if counts is not None:
            counts[idx, t] = state.counts()
        if edges is not None and state.rows.shape[2] > 0:
            occ = state.rows.any(axis=1)
            has = occ.any(axis=1)
            W = occ.shape[1]
            if edge == "max":
                pos = W - 1 - np.argmax(occ[:, ::-1], axis=1)
            else:
                pos = np.argmax(occ, axis=1)
            edges[idx[has], t] = state.anchor[0] + pos[has]
        if hits is not None and state.rows.shape[2:] != (0,) * d_s:
            row0 = state.rows[:, 0]
            src_sl, dst_sl = [], []
            ok = True
            for a, e, l, hs in zip(state.anchor, row0.shape[1:], hit_lo, hits.shape[1:]):
                s0 = max(l - a, 0)
                s1 = min(l + hs - a, e)
                if s0 >= s1:
                    ok = False
                    break
                src_sl.append(slice(s0, s1))
                dst_sl.append(slice(s0 + a - l, s1 + a - l))
            if ok:
                occ0 = row0[(slice(None),) + tuple(src_sl)]
                upd = occ0 & (hits[(slice(None),) + tuple(dst_sl)] < 0)
                hits[(slice(None),) + tuple(dst_sl)] = np.where(
                    upd, t, hits[(slice(None),) + tuple(dst_sl)]
                )
        if t in snapshot_times:
            snapshots[t] = BatchState(t, state.anchor, state.rows.copy())
        return alive

    alive_prev = probe(0)
    for t in range(1, T + 1):
        if not alive_prev.any():
            break
        if dual:
            state = _dual_batch_step(state, model, open_fn, domain, t0)
        elif torus_n is not None:
            state = _torus_batch_step(state, model, open_fn, torus_n, t0)
        else:
            state = _batch_step(state, model, open_fn, domain, t0)
        if per_step is not None:
            per_step(t, state)
        if stop_extent is not None and state.rows.shape[2:] != (0,) * d_s:
            occ_new = ~reached[idx]
            for ax in range(d_s):
                proj = np.any(
                    state.rows,
                    axis=tuple(
                        i for i in range(1, state.rows.ndim) if i != 2 + ax
                    ),
                )
                if proj.shape[1] == 0:
                    continue
                W = proj.shape[1]
                has = proj.any(axis=1)
                mx = state.anchor[ax] + W - 1 - np.argmax(proj[:, ::-1], axis=1)
                mn = state.anchor[ax] + np.argmax(proj, axis=1)
                big = has & (np.maximum(np.abs(mx), np.abs(mn)) >= stop_extent)
                hit_now = big & occ_new
                if hit_now.any():
                    reached[idx[hit_now]] = True
                    state.rows[hit_now] = False
        alive = probe(t)
        died = alive_prev & ~alive
        if stop_extent is not None:
            died &= ~reached[idx]
        extinction[idx[died]] = t
        alive_prev = alive
        if compact and t < T and alive.any() and not alive.all():
            keep = np.flatnonzero(alive)
            idx = idx[keep]
            state = BatchState(state.t, state.anchor, state.rows[keep])
            alive_prev = alive[keep]
            open_fn = batch_open_fn(seeds_u[idx], p, sprinkle_eps)
    alive_at_T[idx[alive_prev]] = True
    if snapshots is not None:
        # runs that die before a requested snapshot time are recorded empty
        empty = np.zeros((B, model.R) + (0,) * d_s, dtype=bool)
        for t_req in snapshot_times:
            if 0 <= t_req <= T and t_req not in snapshots:
                snapshots[t_req] = BatchState(t_req, (0,) * d_s, empty)
    return BatchResult(
        T=T, extinction=extinction, alive_at_T=alive_at_T, reached_extent=reached,
        edges=edges, hits=hits, hit_anchor=hit_lo, counts=counts, snapshots=snapshots,
    )


# ---------------------------------------------------------------------------
# single-replica API

@dataclass
class EdgeTrack:
    """Frontier positions r_0..r_T; None entries after extinction."""

    values: list
    extinct_from: int | None


@dataclass
class Trajectory:
    T: int
    extinction_time: int | None         # None if still alive at T
    counts: list[int]
    final: ProcessState | None = None
    snapshots: dict[int, ProcessState] | None = None
    hitting: dict[tuple, int] | None = None
    edge: EdgeTrack | None = None
    reached_extent: bool | None = None

    @property
    def survived(self) -> bool:
        return self.extinction_time is None


def initial_state(A, model: NormalizedModel, t0: int = 0) -> ProcessState:
    anchor, rows = rows_from_sites(model, A)
    return ProcessState(t0, anchor, rows)


def _field_open_fn(field: FieldSpec, sprinkled: bool = False):
    return batch_open_fn(
        [field.seed], field.p, field.sprinkle_eps if sprinkled else None
    )


def step(state: ProcessState, model: NormalizedModel, field: FieldSpec,
         domain: Domain | None = None) -> ProcessState:
    """One slab-shift step of the single-replica chain."""
    bs = BatchState(0, state.anchor, state.rows[None])
    out = _batch_step(bs, model, _field_open_fn(field), domain, state.t)
    return ProcessState(state.t + 1, out.anchor, out.rows[0])


def dual_step(state: ProcessState, model: NormalizedModel, field: FieldSpec,
              domain: Domain | None = None, t0: int = 0) -> ProcessState:
    """One backwards step of the dual chain; state.t counts dual depth."""
    bs = BatchState(state.t, state.anchor, state.rows[None])
    out = _dual_batch_step(bs, model, _field_open_fn(field), domain, t0)
    return ProcessState(state.t + 1, out.anchor, out.rows[0])


def _single(model, field, T, *, dual=False, A=None, init=None, t0=0,
            domain=None, torus_n=None, sprinkled=False, **probes) -> Trajectory:
    if init is None:
        init = rows_from_sites(model, A if A is not None else [])
    eps = field.sprinkle_eps if sprinkled else None
    res = batch_evolve(
        model, [field.seed], field.p, T, init=init, t0=t0, dual=dual,
        domain=domain, torus_n=torus_n, sprinkle_eps=eps, record_counts=True,
        snapshot_times=probes.get("snapshot_times", ()),
        hit_window=probes.get("hit_window"), edge=probes.get("edge"),
        per_step=probes.get("per_step"),
    )
    ext = int(res.extinction[0]) if res.extinction[0] >= 0 else None
    snaps = None
    if res.snapshots is not None:
        snaps = {
            t: ProcessState(t0 + t, st.anchor, st.rows[0])
            for t, st in res.snapshots.items()
        }
    hitting = None
    if res.hits is not None:
        hitting = {}
        for pos in zip(*np.nonzero(res.hits[0] >= 0)):
            x = tuple(int(l + c) for l, c in zip(res.hit_anchor, pos))
            hitting[x] = int(res.hits[0][pos])
    edge_track = None
    if res.edges is not None:
        vals = [int(v) if v != EDGE_NONE else None for v in res.edges[0]]
        dead = [t for t, v in enumerate(vals) if v is None]
        edge_track = EdgeTrack(values=vals, extinct_from=dead[0] if dead else None)
    return Trajectory(
        T=T, extinction_time=ext, counts=[int(c) for c in res.counts[0]],
        snapshots=snaps, hitting=hitting, edge=edge_track,
    )


def evolve(A, model: NormalizedModel, field: FieldSpec, T: int,
           domain: Domain | None = None, t0: int = 0,
           snapshot_times: Iterable[int] = (), hit_window=None,
           sprinkled: bool = False) -> Trajectory:
    """Iterate the chain from A for T steps (or to extinction)."""
    return _single(
        model, field, T, A=A, t0=t0, domain=domain, sprinkled=sprinkled,
        snapshot_times=snapshot_times, hit_window=hit_window,
    )


def dual_evolve(A, model: NormalizedModel, field: FieldSpec, T: int,
                domain: Domain | None = None, t0: int = 0,
                snapshot_times: Iterable[int] = ()) -> Trajectory:
    """Iterate the dual chain from A for T backwards steps."""
    return _single(
        model, field, T, dual=True, A=A, t0=t0, domain=domain,
        snapshot_times=snapshot_times,
    )


# ---------------------------------------------------------------------------
# pointwise reachability

def _domain_ok(domain, x, t) -> bool:
    if domain is None:
        return True
    m = domain.mask([np.int64(c) for c in x], np.int64(t))
    return True if m is None else bool(m)


def reaches(a, b, model: NormalizedModel, field: FieldSpec,
            domain: Domain | None = None) -> bool:
    """True iff there is a path a -> b of open in-domain sites (start exempt).

    Level-by-level forward search pruned to the backward dependency cone of
    b; reflexive by the empty path.
    """
    a = tuple(int(c) for c in a)
    b = tuple(int(c) for c in b)
    if a == b:
        return True
    dt = b[-1] - a[-1]
    if dt <= 0:
        return False
    mins, maxs = model.spatial_min, model.spatial_max
    levels = {a[-1]: {a[:-1]}}
    for t in range(a[-1] + 1, b[-1] + 1):
        rem = b[-1] - t
        cand = set()
        for y, u in model.split_offsets:
            for x in levels.get(t - u, ()):
                z = tuple(xi + yi for xi, yi in zip(x, y))
                if all(
                    rem * mn <= bi - zi <= rem * mx
                    for bi, zi, mn, mx in zip(b, z, mins, maxs)
                ):
                    cand.add(z)
        here = {
            z for z in cand
            if field.site_open(z + (t,)) and _domain_ok(domain, z, t)
        }
        if here:
            levels[t] = here
    return b[:-1] in levels.get(b[-1], set())


def dual_reaches(b, a, model: NormalizedModel, field: FieldSpec,
                 domain: Domain | None = None) -> bool:
    """True iff there is a dual path b ~> a: steps reversed, with every path
    site except the final one required to be open (and in the domain)."""
    a = tuple(int(c) for c in a)
    b = tuple(int(c) for c in b)
    if a == b:
        return True
    if a[-1] >= b[-1]:
        return False
    mins, maxs = model.spatial_min, model.spatial_max
    levels = {b[-1]: {b[:-1]}}
    for t in range(b[-1] - 1, a[-1] - 1, -1):
        rem = t - a[-1]
        cand = set()
        for y, u in model.split_offsets:
            for x in levels.get(t + u, ()):
                if not (field.site_open(x + (t + u,)) and _domain_ok(domain, x, t + u)):
                    continue
                z = tuple(xi - yi for xi, yi in zip(x, y))
                if all(
                    rem * mn <= zi - ai <= rem * mx
                    for ai, zi, mn, mx in zip(a, z, mins, maxs)
                ):
                    cand.add(z)
        if cand:
            levels[t] = cand
    return a[:-1] in levels.get(a[-1], set())


# ---------------------------------------------------------------------------
# hit and coupled regions

@dataclass
class HitCoupled:
    """H, K and both final states restricted to a common window.

    Arrays have shape (R, *window extent); slab site (x, s) maps to index
    [s, x - window_lo].
    """

    t: int
    window_lo: tuple[int, ...]
    window_hi: tuple[int, ...]
    H: np.ndarray
    K: np.ndarray
    xi_origin: np.ndarray
    xi_slab: np.ndarray
    hitting: dict[tuple, int]


def required_slab_window(model: NormalizedModel, t: int, lo, hi):
    """Initial window whose slab run restricted to [lo, hi) at time t is exact."""
    mins, maxs = model.spatial_min, model.spatial_max
    return (
        tuple(l - t * mx for l, mx in zip(lo, maxs)),
        tuple(h - t * mn for h, mn in zip(hi, mins)),
    )


def hit_and_coupled_regions(model: NormalizedModel, field: FieldSpec, t: int,
                            window, max_width: int | None = None,
                            prune: bool = True) -> HitCoupled:
    """Compare the origin run and the full-slab run on one configuration.

    ``window`` is a (lo, hi) pair of spatial bounds.  The full-slab run is
    started on the window dilated by the dependency cone, which makes its
    restriction to the window exact; if ``max_width`` is given and the
    dilated window is wider, the query is refused.
    """
    lo = tuple(int(c) for c in window[0])
    hi = tuple(int(c) for c in window[1])
    d_s = model.d - 1
    slo, shi = required_slab_window(model, t, lo, hi)
    if max_width is not None and any(h - l > max_width for l, h in zip(slo, shi)):
        raise WindowTooSmall((slo, shi))
    traj_o = evolve(
        [(0,) * d_s + (0,)], model, field, t,
        snapshot_times=[t], hit_window=(lo, hi),
    )
    mins, maxs = model.spatial_min, model.spatial_max
    pad = model.R * max(model.dilation(1), 1) + 1

    def prune_step(step_t, state: BatchState):
        # zero sites that cannot influence the window at time t
        rem = t - step_t
        if rem <= 0 or state.rows.shape[2:] == (0,) * d_s:
            return
        keep_lo = tuple(l - rem * mx - pad for l, mx in zip(lo, maxs))
        keep_hi = tuple(h - rem * mn + pad for h, mn in zip(hi, mins))
        for ax in range(d_s):
            a = state.anchor[ax]
            e = state.rows.shape[2 + ax]
            cut_l = max(keep_lo[ax] - a, 0)
            cut_h = min(keep_hi[ax] - a, e)
            sl = [slice(None)] * state.rows.ndim
            if cut_l > 0:
                sl[2 + ax] = slice(0, cut_l)
                state.rows[tuple(sl)] = False
            if cut_h < e:
                sl[2 + ax] = slice(max(cut_h, 0), e)
                state.rows[tuple(sl)] = False

    res_S = batch_evolve(
        model, [field.seed], field.p, t,
        init=slab_window_rows(model, slo, shi),
        snapshot_times=[t], per_step=prune_step if prune else None,
    )
    ext = tuple(h - l for l, h in zip(lo, hi))
    xi_o = np.zeros((model.R,) + ext, dtype=bool)
    xi_S = np.zeros((model.R,) + ext, dtype=bool)
    for target, st in ((xi_o, traj_o.snapshots[t]), (xi_S, res_S.snapshots[t])):
        rows = st.rows if st.rows.ndim == model.d else st.rows[0]
        src_sl, dst_sl = [], []
        ok = all(e > 0 for e in rows.shape[1:])
        for a, e, l, h in zip(st.anchor, rows.shape[1:], lo, hi):
            s0, s1 = max(l - a, 0), min(h - a, e)
            if s0 >= s1:
                ok = False
                break
            src_sl.append(slice(s0, s1))
            dst_sl.append(slice(s0 + a - l, s1 + a - l))
        if ok:
            target[(slice(None),) + tuple(dst_sl)] = rows[(slice(None),) + tuple(src_sl)]
    K = xi_o == xi_S
    H = np.zeros_like(K)
    hitting = traj_o.hitting or {}
    for x, tx in hitting.items():
        rel = tuple(c - l for c, l in zip(x, lo))
        for s in range(model.R):
            if tx <= t - s:
                H[(s,) + rel] = True
    return HitCoupled(
        t=t, window_lo=lo, window_hi=hi, H=H, K=K,
        xi_origin=xi_o, xi_slab=xi_S, hitting=hitting,
    )


# ---------------------------------------------------------------------------
# edge processes (d = 2)

def half_slab_init(model: NormalizedModel, side: str, trunc: int):
    """Half slab {x <= 0} (side 'right') or {x >= 0} ('left'), truncated."""
    if side == "right":
        return slab_window_rows(model, (-trunc,), (1,))
    return slab_window_rows(model, (0,), (trunc + 1,))


def edge_track(model: NormalizedModel, field: FieldSpec, side: str, T: int,
               margin: float = 0.2) -> EdgeTrack:
    """Frontier of the half-slab process: r_t = max occupied x from {x <= 0}
    (side 'right'), l_t = min occupied x from {x >= 0} ('left').

    The infinite half slab is truncated at spatial distance
    ceil(gamma*T*(1+margin))+1, which leaves every edge value up to time T
    unchanged: omitted sites are too far to reach the frontier by time T.
    """
    if model.d != 2:
        raise DimensionNot2("edge processes are defined for d = 2 only")
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    trunc = int(math.ceil(model.gamma * T * (1 + margin))) + 1
    traj = _single(
        model, field, T, init=half_slab_init(model, side, trunc),
        edge="max" if side == "right" else "min",
    )
    return traj.edge


# ---------------------------------------------------------------------------
# torus dynamics

def torus_extinction(model: NormalizedModel, field: FieldSpec, n: int,
                     T_max: int) -> int | None:
    """Extinction time of the quotient dynamics on the side-n torus started
    from the fully occupied slab; None if still alive at T_max."""
    d_s = model.d - 1
    init = slab_window_rows(model, (0,) * d_s, (n,) * d_s)
    res = batch_evolve(model, [field.seed], field.p, T_max, init=init, torus_n=n)
    return int(res.extinction[0]) if res.extinction[0] >= 0 else None


def torus_extinction_batch(model: NormalizedModel, p, seeds, n: int,
                           T_max: int) -> BatchResult:
    d_s = model.d - 1
    init = slab_window_rows(model, (0,) * d_s, (n,) * d_s)
    return batch_evolve(
        model, seeds, p, T_max, init=init, torus_n=n, compact=True
    )


# ---------------------------------------------------------------------------
# tilted re-indexing

def tilt_period(model: NormalizedModel, v) -> int:
    """Smallest t >= R with t*v integral."""
    v = tuple(as_fraction(c) for c in v)
    q = math.lcm(*(c.denominator for c in v)) if v else 1
    return q * math.ceil(model.R / q)


@dataclass
class TiltedView:
    """Tilted-lattice quantities computed by re-indexing snapshots.

    Sites of the tilted base are keyed by their original spatial coordinate
    z = x + s*v, so all keys are integer tuples; row s of the view collects
    the z with (z + t*v, 0) occupied at time t+s.
    """

    t: int
    R_hat: int
    v: tuple[Fraction, ...]
    rows: dict[int, set]                # s -> set of original-coordinate tuples
    coupled: dict[int, set] | None      # K-hat rows, if a slab run was given
    hitting: dict[tuple, int] | None    # (z..., s) -> t-hat

    def contains(self, x, s) -> bool:
        """Membership of a tilted-base site given by its tilted coordinate x
        (a rational vector with x + s*v integral)."""
        z = tuple(as_fraction(c) + s * vc for c, vc in zip(x, self.v))
        if any(c.denominator != 1 for c in z):
            return False
        return tuple(int(c) for c in z) in self.rows.get(s, set())


def _row0_shifted(model, snap: ProcessState, shift):
    """Original coordinates z with (z + shift, 0) occupied in the snapshot."""
    out = set()
    if any(c.denominator != 1 for c in shift):
        return out
    ishift = tuple(int(c) for c in shift)
    row0 = snap.rows[0]
    for pos in zip(*np.nonzero(row0)):
        x = tuple(a + int(c) for a, c in zip(snap.anchor, pos))
        out.add(tuple(xi - si for xi, si in zip(x, ishift)))
    return out


def tilted_view(model: NormalizedModel, traj: Trajectory, v, t: int,
                traj_slab: Trajectory | None = None,
                hit_horizon: int | None = None) -> TiltedView:
    """Re-index a trajectory into the tilted lattice at time t.

    Needs snapshots of the trajectory at times t, ..., t+R_hat-1 (and at
    multiples s + R_hat*k up to ``hit_horizon`` for hatted hitting times).
    """
    try:
        v = tuple(as_fraction(c) for c in v)
    except (ValueError, TypeError) as exc:
        raise IrrationalTilt(str(exc)) from exc
    if len(v) != model.d - 1:
        raise IrrationalTilt(f"tilt vector {v} has wrong dimension")
    R_hat = tilt_period(model, v)
    snaps = traj.snapshots or {}

    def snap_at(u):
        if u not in snaps:
            raise MissingSnapshots(f"snapshot at time {u} not retained")
        return snaps[u]

    rows = {}
    for s in range(R_hat):
        shift = tuple((t + s) * vc for vc in v)
        rows[s] = _row0_shifted(model, snap_at(t + s), shift)
    coupled = None
    if traj_slab is not None:
        ssnaps = traj_slab.snapshots or {}
        coupled = {}
        for s in range(R_hat):
            if t + s not in ssnaps:
                raise MissingSnapshots(f"slab snapshot at time {t + s} not retained")
            shift = tuple((t + s) * vc for vc in v)
            slab_row = _row0_shifted(model, ssnaps[t + s], shift)
            # sites where the two indicators agree; outside the union of
            # supports both are zero, so only the union needs checking
            coupled[s] = {
                z for z in rows[s] | slab_row if (z in rows[s]) == (z in slab_row)
            }
    hitting = None
    if hit_horizon is not None:
        hitting = {}
        for s in range(R_hat):
            u = s
            while u <= hit_horizon:
                if u in snaps:
                    shift = tuple(u * vc for vc in v)
                    for z in _row0_shifted(model, snaps[u], shift):
                        key = z + (s,)
                        if key not in hitting:
                            hitting[key] = u
                u += R_hat
    return TiltedView(t=t, R_hat=R_hat, v=v, rows=rows, coupled=coupled,
                      hitting=hitting)


# ---------------------------------------------------------------------------
# snapshot serialisation

def _rle_encode(bits: np.ndarray) -> str:
    """Run lengths of a flat bit array, alternating and starting with zeros."""
    flat = np.asarray(bits, dtype=bool).ravel()
    if flat.size == 0:
        return ""
    runs = []
    current, count = False, 0
    # leading zero-run is always present, possibly of length 0
    for v in flat:
        if v == current:
            count += 1
        else:
            runs.append(count)
            current, count = v, 1
    runs.append(count)
    return ",".join(str(r) for r in runs)


def _rle_decode(text: str, size: int) -> np.ndarray:
    out = np.zeros(size, dtype=bool)
    if not text:
        return out
    pos, val = 0, False
    for tok in text.split(","):
        n = int(tok)
        if val:
            out[pos:pos + n] = True
        pos += n
        val = not val
    if pos != size:
        raise ValueError(f"run lengths cover {pos} bits, expected {size}")
    return out


def write_snapshots(snapshots: dict[int, ProcessState], fh) -> None:
    """Dump retained states as JSONL records {t, anchor, shape, rows[]}."""
    for t in sorted(snapshots):
        st = snapshots[t]
        rec = {
            "t": int(t),
            "anchor": [int(a) for a in st.anchor],
            "shape": [int(e) for e in st.rows.shape[1:]],
            "rows": [_rle_encode(st.rows[s]) for s in range(st.rows.shape[0])],
        }
        fh.write(json.dumps(rec, separators=(",", ":")) + "\n")


def read_snapshots(fh) -> dict[int, ProcessState]:
    out = {}
    for line in fh:
        line = line.strip()
        if not line:
            continue
        rec = json.loads(line)
        shape = tuple(rec["shape"])
        size = int(np.prod(shape)) if shape else 1
        rows = np.stack(
            [_rle_decode(r, size).reshape(shape) for r in rec["rows"]]
        )
        out[rec["t"]] = ProcessState(rec["t"], tuple(rec["anchor"]), rows)
    return out
