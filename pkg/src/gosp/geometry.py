"""Space-time regions: boxes, tilted blocks, cones.

All membership tests are exact: tilt vectors are restricted to rationals and
decisions reduce to integer comparisons, so no floating point enters any
membership decision.  Vectorised variants operate on numpy integer arrays
and are used by the dynamics for domain restriction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np


def as_fraction(value) -> Fraction:
    """Parse a rational from int, Fraction or a 'p/q' string."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        if value != int(value):
            raise ValueError(
                f"refusing float {value!r} for an exact coordinate; "
                "pass a Fraction or 'p/q' string"
            )
        return Fraction(int(value))
    raise TypeError(f"cannot interpret {value!r} as a rational")


@dataclass(frozen=True)
class BlockGeometry:
    """Tilted space-time block: t in [0, h), x - t*v in prod [-w_i, w_i)."""

    w: tuple[int, ...]
    h: int
    v: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "w", tuple(int(c) for c in self.w))
        object.__setattr__(self, "v", tuple(as_fraction(c) for c in self.v))
        if any(c <= 0 for c in self.w) or self.h <= 0:
            raise ValueError("block half-widths and height must be positive")
        if len(self.v) != len(self.w):
            raise ValueError("w and v must have the same dimension")

    @property
    def spatial_dim(self) -> int:
        return len(self.w)

    def scaled(self, w_factor: int, h_factor: int) -> "BlockGeometry":
        return BlockGeometry(
            tuple(w_factor * c for c in self.w), h_factor * self.h, self.v
        )


def box_geometry(n: int, d: int, R: int) -> BlockGeometry:
    """The basic box: [-n, n)^{d-1} x [0, R), i.e. an untilted block."""
    return BlockGeometry((n,) * (d - 1), R, (Fraction(0),) * (d - 1))


def block_contains(g: BlockGeometry, site: Sequence[int]) -> bool:
    """Exact membership of an integer site (x, t) in the block."""
    *x, t = site
    if not 0 <= t < g.h:
        return False
    for xi, wi, vi in zip(x, g.w, g.v):
        # xi - t*vi in [-wi, wi), scaled by the denominator of vi
        lhs = xi * vi.denominator - t * vi.numerator
        if not -wi * vi.denominator <= lhs < wi * vi.denominator:
            return False
    return True


def block_mask(
    g: BlockGeometry,
    coords: Sequence[np.ndarray],
    t,
    offset: Sequence[Fraction] | None = None,
) -> np.ndarray:
    """Vectorised block membership for sites (coords, t) - offset.

    ``offset`` is a rational space-time translation of the block; ``t`` may
    be a scalar or an array broadcastable against the coordinate arrays.
    """
    d = g.spatial_dim + 1
    off = (
        tuple(as_fraction(c) for c in offset)
        if offset is not None
        else (Fraction(0),) * d
    )
    t_rel_num = np.asarray(t, dtype=np.int64) * off[-1].denominator - off[-1].numerator
    # t - off_t in [0, h)
    out = (t_rel_num >= 0) & (t_rel_num < g.h * off[-1].denominator)
    for xi, wi, vi, oi in zip(coords, g.w, g.v, off):
        # (xi - oi) - (t - ot) * vi in [-wi, wi), all over a common denominator
        num = (
            (np.asarray(xi, dtype=np.int64) * oi.denominator - oi.numerator)
            * (vi.denominator * off[-1].denominator)
            - t_rel_num * (vi.numerator * oi.denominator)
        )
        scale = wi * vi.denominator * oi.denominator * off[-1].denominator
        out = out & (num >= -scale) & (num < scale)
    return out


@dataclass(frozen=True)
class ConvexPolytope:
    """Rational convex polytope {z : a . z <= b for each half-space}."""

    halfspaces: tuple[tuple[tuple[Fraction, ...], Fraction], ...]

    def __post_init__(self):
        hs = tuple(
            (tuple(as_fraction(c) for c in a), as_fraction(b))
            for a, b in self.halfspaces
        )
        object.__setattr__(self, "halfspaces", hs)

    @classmethod
    def interval(cls, lo, hi) -> "ConvexPolytope":
        """One-dimensional polytope [lo, hi]."""
        lo = as_fraction(lo)
        hi = as_fraction(hi)
        return cls((((Fraction(-1),), -lo), ((Fraction(1),), hi)))

    def contains_point(self, z: Sequence[Fraction]) -> bool:
        z = tuple(as_fraction(c) for c in z)
        return all(
            sum(ai * zi for ai, zi in zip(a, z)) <= b for a, b in self.halfspaces
        )


def cone_contains(polytope: ConvexPolytope, site: Sequence[int]) -> bool:
    """Membership of (x, t) in the cone over the polytope: t > 0, x/t inside."""
    *x, t = site
    if t <= 0:
        return False
    return polytope.contains_point([Fraction(xi, t) for xi in x])


def cone_mask(polytope: ConvexPolytope, coords: Sequence[np.ndarray], t) -> np.ndarray:
    """Vectorised cone membership; a . x <= b * t cleared of denominators."""
    t_arr = np.asarray(t, dtype=np.int64)
    out = np.broadcast_to(t_arr > 0, np.broadcast_shapes(
        *(np.shape(c) for c in coords), np.shape(t_arr)
    )).copy()
    for a, b in polytope.halfspaces:
        denom = math.lcm(b.denominator, *(ai.denominator for ai in a))
        lhs = np.zeros_like(t_arr, shape=out.shape)
        for ai, xi in zip(a, coords):
            lhs = lhs + np.asarray(xi, dtype=np.int64) * int(ai * denom)
        out = out & (lhs <= t_arr * int(b * denom))
    return out


@dataclass(frozen=True)
class TranslatedBlock:
    """A block translated by a rational space-time vector."""

    geometry: BlockGeometry
    offset: tuple[Fraction, ...]

    def contains(self, site: Sequence[int]) -> bool:
        return bool(
            block_mask(
                self.geometry,
                [np.int64(c) for c in site[:-1]],
                np.int64(site[-1]),
                offset=self.offset,
            )
        )

    def mask(self, coords, t) -> np.ndarray:
        return block_mask(self.geometry, coords, t, offset=self.offset)


@dataclass(frozen=True)
class RenormalisationRegions:
    """Source block, the two displaced target blocks and their envelope."""

    source: TranslatedBlock
    target_plus: TranslatedBlock
    target_minus: TranslatedBlock
    envelope: TranslatedBlock


def bg_target_blocks(g: BlockGeometry) -> RenormalisationRegions:
    """Target blocks displaced by 7h along the tilt axis and +-2 w_{d-1}
    sideways, together with the envelope block of 4x the width and 8x the
    height."""
    d_s = g.spatial_dim
    zero = (Fraction(0),) * (d_s + 1)
    time_shift = tuple(vi * (7 * g.h) for vi in g.v) + (Fraction(7 * g.h),)
    side = [Fraction(0)] * (d_s + 1)
    side[d_s - 1] = Fraction(2 * g.w[d_s - 1])
    plus = tuple(a + b for a, b in zip(time_shift, side))
    minus = tuple(a - b for a, b in zip(time_shift, side))
    return RenormalisationRegions(
        source=TranslatedBlock(g, zero),
        target_plus=TranslatedBlock(g, plus),
        target_minus=TranslatedBlock(g, minus),
        envelope=TranslatedBlock(g.scaled(4, 8), zero),
    )
