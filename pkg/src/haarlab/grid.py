"""Finite dyadic model of the unit square.

Coefficient layout
------------------
A 1D spectrum at depth ``N`` has ``n = 2**N`` slots.  Slot 0 holds the
global mean (the coefficient against the constant function 1 = h^1 of
[0, 1)); slot ``p >= 1`` holds the coefficient against ``h_I`` where ``I``
is the dyadic interval at level ``j = floor(log2 p)`` with index
``k = p - 2**j``.  This is heap order: the children of slot ``p`` are
``2p`` (left) and ``2p + 1`` (right), the parent is ``p // 2``.

2D spectra are tensor products, so ``spec[a, b]`` is the coefficient
against ``phi_a(x) phi_b(y)``.  ``a, b >= 1`` is the fully cancellative
family; a zero in either slot is a mean term in that variable.

Vector fields and spectra are arrays of shape ``(n, n, d)``; matrix
symbols use ``(n, n, d, d)``.  Cell samples are indexed ``[x, y]``.  The
inner product is ``<f, g> = sum f * conj(g) * (cell area)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator

import numpy as np

MAX_DEPTH = 10
MAX_DIM = 8


class LevelOverflow(ValueError):
    """Requested children of a finest-level interval."""


class RootHasNoParent(ValueError):
    """Requested the parent (or sign) of the root interval."""


class DimensionMismatch(ValueError):
    pass


@dataclass(frozen=True)
class GridConfig:
    depth: int
    dim: int = 1
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.depth <= MAX_DEPTH:
            raise ValueError(f"depth must be in [1, {MAX_DEPTH}], got {self.depth}")
        if not 1 <= self.dim <= MAX_DIM:
            raise ValueError(f"dim must be in [1, {MAX_DIM}], got {self.dim}")

    @property
    def n(self) -> int:
        return 2 ** self.depth

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


@dataclass(frozen=True, order=True)
class DyadicInterval:
    level: int
    index: int

    def __post_init__(self):
        if self.level < 0 or not 0 <= self.index < 2 ** self.level:
            raise ValueError(f"invalid dyadic interval ({self.level}, {self.index})")

    @property
    def measure(self) -> float:
        return 2.0 ** -self.level

    @property
    def left(self) -> float:
        return self.index * self.measure

    @property
    def right(self) -> float:
        return (self.index + 1) * self.measure

    @property
    def heap(self) -> int:
        return 2 ** self.level + self.index

    @classmethod
    def from_heap(cls, p: int) -> "DyadicInterval":
        p = int(p)
        if p < 1:
            raise ValueError("heap position must be >= 1")
        j = p.bit_length() - 1
        return cls(j, p - 2 ** j)

    def parent(self) -> "DyadicInterval":
        if self.level == 0:
            raise RootHasNoParent("the root interval has no parent")
        return DyadicInterval(self.level - 1, self.index // 2)

    def contains(self, other: "DyadicInterval") -> bool:
        if other.level < self.level:
            return False
        return other.index >> (other.level - self.level) == self.index

    def cells(self, depth: int) -> slice:
        """Slice of finest cells covered by this interval."""
        width = 2 ** (depth - self.level)
        return slice(self.index * width, (self.index + 1) * width)


def children(i: DyadicInterval, depth: int) -> tuple[DyadicInterval, DyadicInterval]:
    if i.level >= depth:
        raise LevelOverflow(f"interval at level {i.level} has no children at depth {depth}")
    return DyadicInterval(i.level + 1, 2 * i.index), DyadicInterval(i.level + 1, 2 * i.index + 1)


def haar_sign(i: DyadicInterval) -> float:
    """The shift coefficient a_I: +1/sqrt2 for a left child, -1/sqrt2 for a right one."""
    if i.level == 0:
        raise RootHasNoParent("the root interval has no parent")
    return (1.0 if i.index % 2 == 0 else -1.0) / np.sqrt(2.0)


@dataclass(frozen=True, order=True)
class DyadicRectangle:
    ix: DyadicInterval
    iy: DyadicInterval

    @property
    def measure(self) -> float:
        return self.ix.measure * self.iy.measure

    def contains(self, other: "DyadicRectangle") -> bool:
        return self.ix.contains(other.ix) and self.iy.contains(other.iy)

    def cells(self, depth: int) -> tuple[slice, slice]:
        return self.ix.cells(depth), self.iy.cells(depth)


@dataclass(frozen=True)
class HaarIndex2D:
    """Basis element ``h^eps_I (x) h^delta_J``; kind 0 is cancellative, 1 is h^1."""

    rect: DyadicRectangle
    kind: tuple[int, int] = (0, 0)

    def slots(self, depth: int) -> tuple[int, int]:
        """Position of this element in the 2D coefficient array.

        Only the completed orthonormal basis has a slot: cancellative factors
        at level < depth and non-cancellative factors on the root.
        """
        out = []
        for interval, kind in zip((self.rect.ix, self.rect.iy), self.kind):
            if kind == 0:
                if interval.level >= depth:
                    raise LevelOverflow(
                        f"cancellative h at level {interval.level} not representable at depth {depth}")
                out.append(interval.heap)
            elif interval.level == 0:
                out.append(0)
            else:
                raise ValueError("non-cancellative factors below the root are not basis elements")
        return out[0], out[1]


def interval_of_slot(p: int) -> DyadicInterval:
    """Interval supporting the basis function in slot ``p`` (root for the mean)."""
    return DyadicInterval(0, 0) if p == 0 else DyadicInterval.from_heap(p)


def iter_basis(depth: int) -> Iterator[HaarIndex2D]:
    n = 2 ** depth
    for a in range(n):
        for b in range(n):
            kind = (int(a == 0), int(b == 0))
            yield HaarIndex2D(DyadicRectangle(interval_of_slot(a), interval_of_slot(b)), kind)


# ---------------------------------------------------------------------------
# 1D per-slot tables

def slot_levels(depth: int) -> np.ndarray:
    """Level of each 1D slot; the mean slot reports level 0."""
    p = np.arange(2 ** depth)
    lev = np.zeros_like(p)
    lev[1:] = np.floor(np.log2(p[1:])).astype(int)
    return lev


def slot_parent(depth: int) -> np.ndarray:
    """Parent slot of each slot; -1 for slots 0 and 1."""
    p = np.arange(2 ** depth)
    par = p // 2
    par[:2] = -1
    return par


def slot_sign(depth: int) -> np.ndarray:
    """sign(a_I) per slot: +1 for left children (even slot), -1 for right, 0 at root/mean."""
    p = np.arange(2 ** depth)
    s = np.where(p % 2 == 0, 1.0, -1.0)
    s[:2] = 0.0
    return s


def haar_profiles(depth: int) -> np.ndarray:
    """Dense ``(n, n)`` matrix whose row ``p`` samples basis function ``phi_p`` on cells."""
    n = 2 ** depth
    out = np.zeros((n, n))
    out[0] = 1.0
    for p in range(1, n):
        i = DyadicInterval.from_heap(p)
        s = i.cells(depth)
        width = s.stop - s.start
        amp = 2.0 ** (i.level / 2)
        out[p, s.start:s.start + width // 2] = amp
        out[p, s.start + width // 2:s.stop] = -amp
    return out


def indicator_profiles(depth: int) -> np.ndarray:
    """Row ``p`` (heap position, 1 <= p < 2n) samples ``h^1_I = 1_I / sqrt|I|``; row 0 unused."""
    n = 2 ** depth
    out = np.zeros((2 * n, n))
    for p in range(1, 2 * n):
        i = DyadicInterval.from_heap(p)
        out[p, i.cells(depth)] = 2.0 ** (i.level / 2)
    return out


# ---------------------------------------------------------------------------
# transforms

def _analyze_axis(f: np.ndarray, axis: int) -> np.ndarray:
    f = np.moveaxis(f, axis, 0)
    n = f.shape[0]
    depth = n.bit_length() - 1
    out = np.empty_like(f, dtype=np.result_type(f, np.float64))
    out[0] = f.sum(axis=0) / n
    for j in range(depth):
        blocks = f.reshape((2 ** j, 2, n // 2 ** (j + 1)) + f.shape[1:])
        halves = blocks.sum(axis=2)
        out[2 ** j:2 ** (j + 1)] = (halves[:, 0] - halves[:, 1]) * (2.0 ** (j / 2) / n)
    return np.moveaxis(out, 0, axis)


def _synthesize_axis(c: np.ndarray, axis: int) -> np.ndarray:
    c = np.moveaxis(c, axis, 0)
    n = c.shape[0]
    depth = n.bit_length() - 1
    out = np.broadcast_to(c[0], c.shape).astype(np.result_type(c, np.float64))
    for j in range(depth):
        coef = c[2 ** j:2 ** (j + 1)] * 2.0 ** (j / 2)
        half = n // 2 ** (j + 1)
        pattern = np.concatenate([np.ones(half), -np.ones(half)])
        contrib = coef[:, None] * pattern.reshape((1, 2 * half) + (1,) * (c.ndim - 1))
        out = out + contrib.reshape(c.shape)
    return np.moveaxis(out, 0, axis)


def _check_square(a: np.ndarray) -> int:
    if a.ndim < 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected (n, n, ...) array, got shape {a.shape}")
    n = a.shape[0]
    if n < 2 or n & (n - 1):
        raise DimensionMismatch(f"grid side must be a power of two >= 2, got {n}")
    return n


def analyze1d(f: np.ndarray, axis: int = 0) -> np.ndarray:
    return _analyze_axis(np.asarray(f), axis)


def synthesize1d(c: np.ndarray, axis: int = 0) -> np.ndarray:
    return _synthesize_axis(np.asarray(c), axis)


def analyze2d(f: np.ndarray) -> np.ndarray:
    """Cell samples ``(n, n, ...)`` to Haar coefficients of the same shape."""
    f = np.asarray(f)
    _check_square(f)
    return _analyze_axis(_analyze_axis(f, 0), 1)


def synthesize2d(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c)
    _check_square(c)
    return _synthesize_axis(_synthesize_axis(c, 0), 1)


def depth_of(a: np.ndarray) -> int:
    return _check_square(a).bit_length() - 1


def inner(f: np.ndarray, g: np.ndarray) -> complex:
    """L2 inner product of sampled fields (linear in ``f``)."""
    if f.shape != g.shape:
        raise DimensionMismatch(f"shape mismatch {f.shape} vs {g.shape}")
    n = f.shape[0]
    return complex(np.sum(f * np.conj(g)) / n ** 2)


def l2norm(f: np.ndarray) -> float:
    n = f.shape[0]
    return float(np.sqrt(np.sum(np.abs(f) ** 2)) / n)


def coef_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Inner product in coefficient space (Parseval partner of :func:`inner`)."""
    return complex(np.sum(a * np.conj(b)))


def cancellative_mask(depth: int, max_level: int | None = None) -> np.ndarray:
    """Boolean ``(n, n)`` mask of fully cancellative slots, optionally capped by level."""
    n = 2 ** depth
    lev = slot_levels(depth)
    ok = np.arange(n) >= 1
    if max_level is not None:
        ok &= lev <= max_level
    return ok[:, None] & ok[None, :]


def project_cancellative(spec: np.ndarray, max_level: int | None = None) -> np.ndarray:
    mask = cancellative_mask(depth_of(spec), max_level)
    return spec * mask.reshape(mask.shape + (1,) * (spec.ndim - 2))


def evaluate_basis(h: HaarIndex2D, depth: int) -> np.ndarray:
    """Sample the scalar basis function ``h`` on the ``(n, n)`` cell grid."""
    out = []
    for interval, kind in zip((h.rect.ix, h.rect.iy), h.kind):
        if kind == 0 and interval.level >= depth:
            raise LevelOverflow(
                f"cancellative h at level {interval.level} not representable at depth {depth}")
        prof = np.zeros(2 ** depth)
        s = interval.cells(depth)
        amp = 2.0 ** (interval.level / 2)
        if kind == 1:
            prof[s] = amp
        else:
            mid = (s.start + s.stop) // 2
            prof[s.start:mid] = amp
            prof[mid:s.stop] = -amp
        out.append(prof)
    return np.outer(out[0], out[1])


# ---------------------------------------------------------------------------
# serialization

def spectrum_to_json(spec: np.ndarray) -> str:
    """Serialize a vector ``(n, n, d)`` or matrix ``(n, n, d, d)`` spectrum.

    Each coefficient entry stores its value under ``"matrix"`` as a list of
    ``[re, im]`` pairs (row-major for matrices, one pair per component for
    vectors).
    """
    depth = depth_of(spec)
    dim = spec.shape[2]
    coeffs = []
    n = 2 ** depth
    for a in range(n):
        ia = interval_of_slot(a)
        for b in range(n):
            ib = interval_of_slot(b)
            value = np.asarray(spec[a, b]).reshape(-1)
            coeffs.append({
                "kind": [int(a == 0), int(b == 0)],
                "jx": ia.level, "kx": ia.index,
                "jy": ib.level, "ky": ib.index,
                "matrix": [[float(v.real), float(v.imag)] for v in value],
            })
    return json.dumps({"depth": depth, "dim": dim, "coefficients": coeffs})


def spectrum_from_json(text: str) -> np.ndarray:
    doc = json.loads(text)
    depth, dim = doc["depth"], doc["dim"]
    n = 2 ** depth
    first = doc["coefficients"][0]["matrix"] if doc["coefficients"] else []
    shape = (n, n, dim) if len(first) == dim else (n, n, dim, dim)
    out = np.zeros(shape, dtype=complex)
    for c in doc["coefficients"]:
        slot = []
        for kind, j, k in ((c["kind"][0], c["jx"], c["kx"]), (c["kind"][1], c["jy"], c["ky"])):
            slot.append(0 if kind == 1 else 2 ** j + k)
        vals = np.array([re + 1j * im for re, im in c["matrix"]])
        out[slot[0], slot[1]] = vals.reshape(shape[2:])
    return out
