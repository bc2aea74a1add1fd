"""Reproducible product-Bernoulli random field on Z^d.

Every site carries a single uniform value derived by a counter-mode hash of
(seed, coordinates); a site is open iff that value falls below the open
probability.  There is no generator state and no sequencing, so queries are
pure and thread-schedule independent, and the single-uniform construction
gives an exact monotone coupling in p: raising p can only open more sites on
the same seed.

The mixer is the splitmix64 finalizer chained over the coordinates; its
identifier is recorded in run manifests so outputs are bit-reproducible
across machines.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

MIXER_ID = "splitmix64-chain-v1"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_COORD_MUL = np.uint64(0xD6E8FEB86659FD93)
_MASK64 = (1 << 64) - 1

_TWO64 = 1 << 64


class FieldError(ValueError):
    pass


class SprinkleUnset(FieldError):
    pass


def _mix64(z):
    z = (z ^ (z >> _S30)) * _MUL1
    z = (z ^ (z >> _S27)) * _MUL2
    return z ^ (z >> _S31)


def _as_u64(values) -> np.ndarray:
    if isinstance(values, np.ndarray):
        if values.dtype == np.uint64:
            return values
        if values.dtype.kind in "iub":
            return values.astype(np.uint64)
        src = values
    else:
        # never let numpy infer a dtype here: python ints above 2**63 would
        # silently go through float64 and lose their low bits
        src = np.asarray(values, dtype=object)
    flat = np.asarray(
        [int(v) & _MASK64 for v in np.ravel(src)], dtype=np.uint64
    )
    return flat.reshape(np.shape(src))


def site_hash(seed, coords, stream: int = 0) -> np.ndarray:
    """64-bit hash of (seed, x_1, ..., x_d), vectorised over coordinates.

    ``coords`` is a sequence of d integer arrays (broadcastable against each
    other); ``seed`` may itself be an array for batched runs with distinct
    seeds.  ``stream`` selects an independent substream (used for the
    sprinkle field).
    """
    with np.errstate(over="ignore"):
        h = _mix64(_as_u64(seed) + _GOLDEN * np.uint64((stream + 1) & _MASK64))
        for c in coords:
            h = _mix64(h ^ (_as_u64(c) * _COORD_MUL + _GOLDEN))
    return h


def threshold_for(p: float) -> int:
    """Integer threshold T with site open iff hash < T; exact for the given
    double, and monotone in p."""
    if p <= 0:
        return 0
    if p >= 1:
        return _TWO64
    return int(Fraction(p) * _TWO64)


def open_given_hash(h: np.ndarray, threshold: int) -> np.ndarray:
    if threshold >= _TWO64:
        return np.ones(np.shape(h), dtype=bool)
    return h < np.uint64(threshold)


@dataclass(frozen=True)
class FieldSpec:
    """The configuration omega: seed, open probability, optional sprinkle.

    With ``sprinkle_eps`` set, an independent substream of extra open sites
    is available so that base-open OR extra-open is Bernoulli(p + eps); the
    extra rate is eps/(1-p) so the composite marginal comes out at exactly
    p + eps while base-open still implies sprinkled-open on the same seed.
    """

    seed: int
    p: float
    sprinkle_eps: float | None = None
    d: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise FieldError(f"p must be in [0,1], got {self.p}")
        if self.sprinkle_eps is not None:
            if not 0.0 <= self.sprinkle_eps <= 1.0 - self.p:
                raise FieldError(
                    f"sprinkle_eps must be in [0, 1-p], got {self.sprinkle_eps}"
                )

    def _check_site(self, site):
        if self.d is not None and len(site) != self.d:
            raise FieldError(
                f"site {tuple(site)} has dimension {len(site)}, expected {self.d}"
            )

    @property
    def _extra_rate(self) -> float:
        eps = self.sprinkle_eps
        if eps is None:
            raise SprinkleUnset("sprinkle_eps not set on this field")
        if eps == 0.0:
            return 0.0
        return float(Fraction(eps) / (1 - Fraction(self.p)))

    def open_mask(self, coords) -> np.ndarray:
        """Vectorised openness for sites given as d coordinate arrays."""
        h = site_hash(self.seed, coords)
        return open_given_hash(h, threshold_for(self.p))

    def site_open(self, site) -> bool:
        self._check_site(site)
        return bool(self.open_mask([np.int64(c) for c in site]))

    def sprinkled_mask(self, coords) -> np.ndarray:
        extra_rate = self._extra_rate
        base = self.open_mask(coords)
        if extra_rate == 0.0:
            return base
        extra = open_given_hash(
            site_hash(self.seed, coords, stream=1), threshold_for(extra_rate)
        )
        return base | extra

    def sprinkled_open(self, site) -> bool:
        self._check_site(site)
        return bool(self.sprinkled_mask([np.int64(c) for c in site]))

    def extra_mask(self, coords) -> np.ndarray:
        """Only the extra open sites from the sprinkle substream."""
        extra_rate = self._extra_rate
        if extra_rate == 0.0:
            return np.zeros(np.broadcast_shapes(*(np.shape(c) for c in coords)),
                            dtype=bool)
        return open_given_hash(
            site_hash(self.seed, coords, stream=1), threshold_for(extra_rate)
        )

    def extra_open(self, site) -> bool:
        self._check_site(site)
        return bool(self.extra_mask([np.int64(c) for c in site]))

    def with_p(self, p: float) -> "FieldSpec":
        """Same seed and mixer, different open probability (exact monotone
        coupling: open sites are non-decreasing in p)."""
        return FieldSpec(seed=self.seed, p=p, sprinkle_eps=None, d=self.d)


def spawn_seed(master_seed: int, index: int) -> int:
    """Derived per-replica seed; pure function of (master_seed, index)."""
    with np.errstate(over="ignore"):
        h = _mix64(_as_u64(master_seed) ^ _mix64(_as_u64(index) + _GOLDEN))
    return int(h)


def spawn_seeds(master_seed: int, start: int, stop: int) -> np.ndarray:
    """Vectorised spawn_seed over the index range [start, stop)."""
    idx = np.arange(start, stop, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix64(_as_u64(master_seed) ^ _mix64(idx + _GOLDEN))
