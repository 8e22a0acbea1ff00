"""Matrix-valued dyadic product BMO, Carleson embedding, square and maximal functions."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .grid import (DyadicInterval, DyadicRectangle, analyze1d, depth_of,
                   haar_profiles, indicator_profiles, slot_levels)


class BoundViolation(AssertionError):
    pass


# ---------------------------------------------------------------------------
# test-set families

def _rect_slots(depth: int) -> tuple[np.ndarray, np.ndarray]:
    """(px, py) heap slots of every fully cancellative rectangle, in row-major order."""
    p = np.arange(1, 2 ** depth)
    px, py = np.meshgrid(p, p, indexing="ij")
    return px.ravel(), py.ravel()


def rectangle_mask(depth: int, px: int, py: int) -> np.ndarray:
    n = 2 ** depth
    rect = DyadicRectangle(DyadicInterval.from_heap(px), DyadicInterval.from_heap(py))
    m = np.zeros((n, n), dtype=bool)
    m[rect.cells(depth)] = True
    return m


@dataclass
class TestSetFamily:
    """Finite family of "open sets": nonempty unions of finest cells, as ``(M, n, n)`` masks."""

    __test__ = False  # not a pytest class

    kind: str
    members: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.members = np.asarray(self.members, dtype=bool)
        if self.members.ndim != 3 or len(self.members) == 0:
            raise ValueError("a test-set family needs at least one (n, n) member")
        if not self.members.reshape(len(self.members), -1).any(axis=1).all():
            raise ValueError("every member must be nonempty")

    @property
    def depth(self) -> int:
        return self.members.shape[1].bit_length() - 1

    @property
    def measures(self) -> np.ndarray:
        n = self.members.shape[1]
        return self.members.reshape(len(self.members), -1).sum(axis=1) / n ** 2

    def __len__(self) -> int:
        return len(self.members)

    def __or__(self, other: "TestSetFamily") -> "TestSetFamily":
        return TestSetFamily(f"{self.kind}+{other.kind}",
                             _dedupe(np.concatenate([self.members, other.members])))

    def containment(self) -> np.ndarray:
        """``(M, R)`` boolean matrix: rectangle ``R`` (cancellative, row-major slots) lies in member ``M``."""
        depth = self.depth
        n = 2 ** depth
        M = len(self.members)
        out = np.zeros((M, n - 1, n - 1), dtype=bool)
        for jx in range(depth):
            for jy in range(depth):
                bx, by = n >> jx, n >> jy
                counts = self.members.reshape(M, 2 ** jx, bx, 2 ** jy, by).sum(axis=(2, 4))
                full = counts == bx * by
                out[:, 2 ** jx - 1:2 ** (jx + 1) - 1, 2 ** jy - 1:2 ** (jy + 1) - 1] = full
        return out.reshape(M, -1)


def _dedupe(masks: np.ndarray) -> np.ndarray:
    flat = masks.reshape(len(masks), -1)
    _, idx = np.unique(np.packbits(flat, axis=1), axis=0, return_index=True)
    return masks[np.sort(idx)]


def rectangles_family(depth: int) -> TestSetFamily:
    px, py = _rect_slots(depth)
    return TestSetFamily("rectangles", np.stack([rectangle_mask(depth, a, b) for a, b in zip(px, py)]))


def full_square_family(depth: int) -> TestSetFamily:
    n = 2 ** depth
    return TestSetFamily("full-square", np.ones((1, n, n), dtype=bool))


def random_unions_family(depth: int, m: int = 8, trials: int = 512, seed: int = 0) -> TestSetFamily:
    """Unions of up to ``m`` cancellative dyadic rectangles.

    When the number of such unions (counted as rectangle subsets of size
    ``1..m``) does not exceed ``trials``, all of them are enumerated;
    otherwise ``trials`` random ones are drawn.
    """
    rects = rectangles_family(depth).members
    R = len(rects)
    total = sum(comb(R, k) for k in range(1, min(m, R) + 1))
    if total <= trials:
        subsets = (s for k in range(1, min(m, R) + 1) for s in itertools.combinations(range(R), k))
        members = [rects[list(s)].any(axis=0) for s in subsets]
    else:
        rng = np.random.default_rng(seed)
        members = []
        for _ in range(trials):
            k = int(rng.integers(1, min(m, R) + 1))
            pick = rng.choice(R, size=k, replace=False)
            members.append(rects[pick].any(axis=0))
    return TestSetFamily(f"random-unions({m},{trials})", _dedupe(np.stack(members)))


def exhaustive_family(depth: int) -> TestSetFamily:
    """Every nonempty union of finest cells; only feasible for depth <= 2."""
    if depth > 2:
        raise ValueError("exhaustive enumeration is limited to depth <= 2")
    n = 2 ** depth
    cells = n * n
    codes = np.arange(1, 2 ** cells, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(cells)) & 1
    return TestSetFamily("exhaustive-cells", bits.astype(bool).reshape(-1, n, n))


def default_family(depth: int, seed: int = 0, m: int = 8, trials: int = 512) -> TestSetFamily:
    fam = rectangles_family(depth) | full_square_family(depth) | random_unions_family(depth, m, trials, seed)
    fam.kind = "default"
    return fam


# ---------------------------------------------------------------------------
# BMO norms

@dataclass
class BmoReport:
    rect_norm: float
    openset_norm: float
    order: str                   # "left": sum B^ B^*, "right": sum B^* B^
    trace_quantity: float
    witness_cells: list
    left_norm: float = 0.0
    right_norm: float = 0.0
    ignored_mass: float = 0.0    # Frobenius norm of non-cancellative coefficients

    def to_json(self) -> str:
        return json.dumps({"rect_norm": self.rect_norm, "openset_norm": self.openset_norm,
                           "order": self.order, "trace_quantity": self.trace_quantity,
                           "witness_cells": self.witness_cells})


def _gram_terms(B: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n, d = B.shape[0], B.shape[-1]
    C = B[1:, 1:].reshape(-1, d, d)
    left = C @ np.conj(np.swapaxes(C, -1, -2))
    right = np.conj(np.swapaxes(C, -1, -2)) @ C
    fro = np.sum(np.abs(C) ** 2, axis=(1, 2))
    return left, right, fro


def _top_eig(S: np.ndarray) -> np.ndarray:
    S = (S + np.conj(np.swapaxes(S, -1, -2))) / 2
    return np.clip(np.linalg.eigvalsh(S)[..., -1], 0.0, None)


def _family_sums(B: np.ndarray, family: TestSetFamily):
    if depth_of(B) != family.depth:
        raise ValueError("symbol and family live on different grids")
    d = B.shape[-1]
    left, right, fro = _gram_terms(B)
    C = family.containment().astype(float)
    mu = family.measures
    L = (C @ left.reshape(len(left), -1)).reshape(-1, d, d) / mu[:, None, None]
    Rr = (C @ right.reshape(len(right), -1)).reshape(-1, d, d) / mu[:, None, None]
    T = C @ fro / mu
    return L, Rr, T


def bmo_norm(B: np.ndarray, family: TestSetFamily) -> BmoReport:
    """Dyadic product BMO norm of the matrix spectrum ``B`` (``(n, n, d, d)``) over ``family``.

    Both orders ``B^ B^*`` and ``B^* B^`` are evaluated on every member; only
    fully cancellative coefficients count.
    """
    if len(family) == 0:
        raise ValueError("empty family")
    L, Rr, T = _family_sums(B, family)
    el, er = _top_eig(L), _top_eig(Rr)
    il, ir = int(np.argmax(el)), int(np.argmax(er))
    left, right = float(np.sqrt(el[il])), float(np.sqrt(er[ir]))
    order, idx = ("left", il) if left >= right else ("right", ir)
    witness = np.argwhere(family.members[idx]).tolist()

    rect = rectangles_family(depth_of(B))
    Lr, Rrr, _ = _family_sums(B, rect)
    rect_norm = float(np.sqrt(max(_top_eig(Lr).max(), _top_eig(Rrr).max())))

    ignored = np.sqrt(max(np.sum(np.abs(B) ** 2) - np.sum(np.abs(B[1:, 1:]) ** 2), 0.0))
    return BmoReport(rect_norm, max(left, right), order, float(np.sqrt(T.max())),
                     witness, left, right, float(ignored))


def bmo_on_cells(B: np.ndarray, cells) -> dict:
    """Replay a witness: both order quantities on the single set of ``cells``."""
    n = B.shape[0]
    mask = np.zeros((1, n, n), dtype=bool)
    for x, y in cells:
        mask[0, x, y] = True
    L, Rr, T = _family_sums(B, TestSetFamily("witness", mask))
    return {"left": float(np.sqrt(_top_eig(L)[0])), "right": float(np.sqrt(_top_eig(Rr)[0])),
            "trace_quantity": float(np.sqrt(T[0]))}


def trace_bound_check(B: np.ndarray, family: TestSetFamily) -> tuple[float, float]:
    """Return ``(max_U sqrt(|U|^-1 sum ||B^(R)||_F^2), d * ||B||_BMO)``; raise if the first exceeds the second."""
    rep = bmo_norm(B, family)
    d = B.shape[-1]
    lhs, bound = rep.trace_quantity, d * rep.openset_norm
    if lhs > (1 + 1e-9) * bound + 1e-300:
        raise BoundViolation(f"trace quantity {lhs} exceeds d*C = {bound}")
    return lhs, bound


# ---------------------------------------------------------------------------
# Carleson embedding

@dataclass
class CarlesonResult:
    c1_emp: float
    c2: float
    c1_exact: float

    @property
    def ratio(self) -> float:
        return self.c1_emp / self.c2 if self.c2 > 0 else 0.0


def _average_rows(depth: int) -> np.ndarray:
    """``(R, n*n)`` matrix mapping cell samples to averages over each cancellative rectangle."""
    n = 2 ** depth
    A1 = indicator_profiles(depth)[1:n] * (2.0 ** (slot_levels(depth)[1:] / 2))[:, None] / n
    return np.einsum("ax,by->abxy", A1, A1).reshape((n - 1) ** 2, n * n)


def carleson_weights(B: np.ndarray, norm: str = "fro") -> np.ndarray:
    """``a_R = ||B^(R)||^2`` on cancellative slots (Frobenius or operator norm)."""
    n = B.shape[0]
    a = np.zeros((n, n))
    C = B[1:, 1:]
    if norm == "fro":
        a[1:, 1:] = np.sum(np.abs(C) ** 2, axis=(-2, -1))
    elif norm == "op":
        a[1:, 1:] = np.linalg.norm(C, ord=2, axis=(-2, -1)) ** 2
    else:
        raise ValueError(f"unknown norm {norm!r}")
    return a


def carleson_check(a: np.ndarray, trials: int = 20, family: TestSetFamily | None = None,
                   seed: int = 0, steps: int = 200) -> CarlesonResult:
    """Compare the packing constant ``C2`` with the embedding constant ``C1``.

    ``a`` holds nonnegative weights on cancellative slots ``a[px, py]``.
    ``c1_emp`` maximizes ``sum a_R <f>_R^2 / ||f||^2`` over random nonnegative
    ``f`` refined by multiplicative perturbations; ``c1_exact`` is the top
    eigenvalue of the underlying quadratic form.
    """
    a = np.asarray(a, dtype=float)
    if (a < 0).any() or not np.isfinite(a).all():
        raise ValueError("weights must be finite and nonnegative")
    depth = depth_of(a)
    n = 2 ** depth
    family = family or default_family(depth, seed)
    w = a[1:, 1:].ravel()
    C2 = float((family.containment() @ w / family.measures).max())
    A = _average_rows(depth)
    Q = (A.T * w) @ A * n ** 2
    c1_exact = float(max(np.linalg.eigvalsh(Q)[-1], 0.0))

    def value(f):
        return float(f @ Q @ f / (f @ f))

    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(max(trials, 0)):
        f = rng.exponential(size=n * n)
        cur = value(f)
        for _ in range(steps):
            g = f * np.exp(0.3 * rng.standard_normal(n * n))
            v = value(g)
            if v > cur:
                f, cur = g, v
        best = max(best, cur)
    if not np.isfinite(best):
        raise BoundViolation("empirical embedding constant is not finite")
    return CarlesonResult(best, C2, c1_exact)


# ---------------------------------------------------------------------------
# square and maximal functions

def _level_indicator(depth: int) -> np.ndarray:
    """Row ``p`` (cancellative slot) samples ``1_I / |I|``."""
    n = 2 ** depth
    return indicator_profiles(depth)[1:n] * (2.0 ** (slot_levels(depth)[1:] / 2))[:, None]


def square_function(spec: np.ndarray) -> np.ndarray:
    """``S(f)(x, y) = (sum_R ||f^(R)||^2 1_R(x, y) / |R|)^(1/2)`` over cancellative ``R``.

    ``spec`` is a vector or matrix spectrum; matrix coefficients use the
    Frobenius norm.
    """
    depth = depth_of(spec)
    W = np.abs(spec[1:, 1:]) ** 2
    W = W.reshape(W.shape[0], W.shape[1], -1).sum(axis=-1)
    E = _level_indicator(depth)
    return np.sqrt(E.T @ W @ E)


def _block_max_of_means(g: np.ndarray, axes) -> np.ndarray:
    g = np.abs(np.asarray(g, dtype=float))
    depth = g.shape[axes[0]].bit_length() - 1
    levels = [range(depth + 1) if ax in axes else [None] for ax in (0, 1)]
    n0, n1 = g.shape[:2]
    out = np.zeros_like(g)
    for jx, jy in itertools.product(*levels):
        bx = n0 >> jx if jx is not None else 1
        by = n1 >> jy if jy is not None else 1
        blocks = g.reshape((n0 // bx, bx, n1 // by, by) + g.shape[2:]).mean(axis=(1, 3))
        full = np.repeat(np.repeat(blocks, bx, axis=0), by, axis=1)
        out = np.maximum(out, full)
    return out


def strong_maximal(g: np.ndarray) -> np.ndarray:
    """Dyadic strong maximal function: max of averages of ``|g|`` over dyadic rectangles containing each cell."""
    return _block_max_of_means(g, (0, 1))


def maximal_x(g: np.ndarray) -> np.ndarray:
    return _block_max_of_means(g, (0,))


def maximal_y(g: np.ndarray) -> np.ndarray:
    return _block_max_of_means(g, (1,))


def rectangle_averages(f: np.ndarray) -> np.ndarray:
    """``<f>_R`` for every cancellative ``R`` as an ``(n, n, ...)`` slot array (zeros on mean slots)."""
    return _pairing(f, "h1", "h1") * _rect_weights(depth_of(f)).reshape(
        (f.shape[0], f.shape[0]) + (1,) * (f.ndim - 2))


def _pairing(f: np.ndarray, x_kind: str, y_kind: str) -> np.ndarray:
    """``<f, u_I (x) v_J>`` on cancellative slots, ``u, v`` in {"h", "h1"}."""
    depth = depth_of(f)
    n = 2 ** depth
    prof = {"h": haar_profiles(depth)[1:] / n, "h1": indicator_profiles(depth)[1:n] / n}
    out = np.zeros(f.shape, dtype=np.result_type(f, float))
    out[1:, 1:] = np.einsum("ax,xy...,by->ab...", prof[x_kind], f, prof[y_kind])
    return out


def _rect_weights(depth: int) -> np.ndarray:
    """``|I|^{-1/2} |J|^{-1/2}`` on slots (zero on mean slots)."""
    w = np.zeros(2 ** depth)
    w[1:] = 2.0 ** (slot_levels(depth)[1:] / 2)
    return np.outer(w, w)


def pi1(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Matrix spectrum ``Pi1^(R) = <g, h_I (x) h_J> <f, h1_I (x) h1_J>^* |I|^-1/2 |J|^-1/2`` (cell samples in)."""
    w = _rect_weights(depth_of(g))[..., None]
    return np.einsum("abi,abj->abij", _pairing(g, "h", "h") * w, np.conj(_pairing(f, "h1", "h1")))


def pi2(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """``Pi2^(R) = <g, h1_I (x) h_J> <f, h_I (x) h1_J>^* |I|^-1/2 |J|^-1/2``."""
    w = _rect_weights(depth_of(g))[..., None]
    return np.einsum("abi,abj->abij", _pairing(g, "h1", "h") * w, np.conj(_pairing(f, "h", "h1")))


def matrix_pairing(B: np.ndarray, P: np.ndarray) -> complex:
    """``<B, P> = sum_R tr(B^(R) P^(R)^*)`` between matrix spectra."""
    return complex(np.sum(B * np.conj(P)))


def stilde(f: np.ndarray) -> np.ndarray:
    """``(sum_I (M_y ||<f, h_I>_x||)^2(y) 1_I(x) / |I|)^(1/2)`` for cell samples ``f``."""
    depth = depth_of(f)
    coef = analyze1d(f, axis=0)[1:]
    mag = np.sqrt(np.sum(np.abs(coef) ** 2, axis=tuple(range(2, f.ndim)))) if f.ndim > 2 else np.abs(coef)
    My = _block_max_of_means(mag, (1,))
    E = _level_indicator(depth)
    return np.sqrt(E.T @ My ** 2)
