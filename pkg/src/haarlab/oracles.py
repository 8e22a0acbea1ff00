"""Brute-force reference computations.

These rebuild the shift and the commutators from sampled basis functions
and explicit Haar sums, without the fast transforms of :mod:`haarlab.grid`
or the coefficient-space shift of :mod:`haarlab.operators`.  They are
O(n^4) or worse and meant for depth <= 4.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .grid import haar_profiles, interval_of_slot


@lru_cache(maxsize=None)
def shift_matrix(depth: int) -> np.ndarray:
    """Dense cell-sample matrix of the truncated shift: ``sum_I Sh(h_I) h_I^T / n``."""
    n = 2 ** depth
    H = haar_profiles(depth)
    S = np.zeros((n, n))
    for c in range(1, n):
        if 2 * c + 1 < n:
            image = (H[2 * c] - H[2 * c + 1]) / np.sqrt(2.0)
            S += np.outer(image, H[c]) / n
    S.setflags(write=False)
    return S


@lru_cache(maxsize=None)
def product_tables(depth: int) -> dict[str, np.ndarray]:
    """1D tables indexed ``[a, c, x]`` over basis slots ``a`` (symbol) and ``c`` (function).

    ``"M"``: ``phi_a phi_c``; ``"S"``: ``phi_a Sh(phi_c)``; ``"C"``:
    ``[M_{phi_a}, Sh](phi_c) = phi_a Sh(phi_c) - Sh(phi_a phi_c)``.
    """
    H = haar_profiles(depth)
    S = shift_matrix(depth)
    M = H[:, None, :] * H[None, :, :]
    Sh = H[:, None, :] * (H @ S.T)[None, :, :]
    C = Sh - M @ S.T
    return {"M": M, "S": Sh, "C": C}


@lru_cache(maxsize=None)
def containment_1d(depth: int, strict: bool = False) -> np.ndarray:
    """``mask[a, c]``: interval of slot ``a`` inside interval of slot ``c`` (mean slot = root)."""
    n = 2 ** depth
    out = np.zeros((n, n), dtype=bool)
    for a in range(n):
        ia = interval_of_slot(a)
        for c in range(n):
            ic = interval_of_slot(c)
            out[a, c] = ic.contains(ia) and (not strict or ia != ic or a != c)
    if strict:
        out &= ~np.eye(n, dtype=bool)
    return out


def quadruple_sum(B: np.ndarray, f: np.ndarray, restrict: bool = True) -> np.ndarray:
    """``sum B^(a,b) f^(c,e) C[a,c] (x) C[b,e]`` over all basis slots (cell samples out).

    With ``restrict`` only pairs whose symbol interval lies inside the
    function interval in both variables are summed.
    """
    depth = B.shape[0].bit_length() - 1
    C = product_tables(depth)["C"]
    mask = containment_1d(depth) if restrict else np.ones((B.shape[0],) * 2, dtype=bool)
    Cm = C * mask[:, :, None]
    # contract c and e first: G[a, b, x, y, i] = sum_{c,e} f[c,e,i] C[a,c,x] C[b,e,y]
    G = np.einsum("cei,acx,bey->abxyi", f, Cm, Cm, optimize=True)
    return np.einsum("abij,abxyj->xyi", B, G, optimize=True)


def restricted_term(B: np.ndarray, f: np.ndarray, term: int, case: str | None = None) -> np.ndarray:
    """``T~_term`` by explicit summation over cancellative ``I <= K, J <= L``.

    ``case`` selects one of ``"I=K,J=L"``, ``"I<K,J<L"``, ``"I=K,J<L"``,
    ``"I<K,J=L"``; ``None`` sums all four.  The outer shifts of ``T2..T4``
    are applied with the dense :func:`shift_matrix`.
    """
    depth = B.shape[0].bit_length() - 1
    n = 2 ** depth
    tabs = product_tables(depth)
    kinds = {1: ("S", "S"), 2: ("M", "S"), 3: ("S", "M"), 4: ("M", "M")}[term]
    canc = np.zeros((n, n), dtype=bool)
    canc[1:, 1:] = True
    eq = np.eye(n, dtype=bool) & canc
    lt = containment_1d(depth, strict=True) & canc
    masks = {"=": eq, "<": lt}
    if case is None:
        return sum(restricted_term(B, f, term, c) for c in ("I=K,J=L", "I<K,J<L", "I=K,J<L", "I<K,J=L"))
    cx, cy = case[1], case[5]
    X = tabs[kinds[0]] * masks[cx][:, :, None]
    Y = tabs[kinds[1]] * masks[cy][:, :, None]
    G = np.einsum("cei,acx,bey->abxyi", f, X, Y, optimize=True)
    out = np.einsum("abij,abxyj->xyi", B, G, optimize=True)
    S = shift_matrix(depth)
    if kinds[0] == "M":
        out = np.einsum("uv,vyi->uyi", S, out)
    if kinds[1] == "M":
        out = np.einsum("uv,xvi->xui", S, out)
    return out


def direct_paraproduct(variant: str, B: np.ndarray, f: np.ndarray, sign: str = "haar") -> np.ndarray:
    """Paraproducts by explicit loops over rectangles (cell samples in and out)."""
    depth = B.shape[0].bit_length() - 1
    n = 2 ** depth

    def h(p, kind):
        iv = interval_of_slot(p)
        s = iv.cells(depth)
        v = np.zeros(n)
        amp = 2.0 ** (iv.level / 2)
        if kind == "h1":
            v[s] = amp
        else:
            mid = (s.start + s.stop) // 2
            v[s.start:mid], v[mid:s.stop] = amp, -amp
        return v

    def pair(u, v):
        return np.einsum("x,xyi,y->i", u, f, v) / n ** 2

    out = np.zeros(f.shape, dtype=complex)
    w = lambda p: 2.0 ** (interval_of_slot(p).level / 2)  # noqa: E731
    for I in range(1, n):
        for J in range(1, n):
            if variant in ("P3", "P4", "P5"):
                px, ox, py, oy = {"P3": ("h1", "h", "h1", "h"),
                                  "P4": ("h", "h1", "h1", "h"),
                                  "P5": ("h1", "h", "h", "h1")}[variant]
                val = B[I, J] @ pair(h(I, px), h(J, py)) * w(I) * w(J)
                out += np.einsum("x,y,i->xyi", h(I, ox), h(J, oy), val)
            elif variant in ("P1", "P2"):
                if J < 2:
                    continue
                parent = J // 2
                s = 1.0 if (sign == "plus" or J % 2 == 0) else -1.0
                if variant == "P1":
                    val = s * (B[I, parent] @ pair(h(I, "h"), h(J, "h"))) * w(I) * w(parent)
                    out += np.einsum("x,y,i->xyi", h(I, "h1"), h(J, "h"), val)
                else:
                    val = s * (B[I, parent] @ pair(h(I, "h1"), h(parent, "h"))) * w(I) * w(parent)
                    out += np.einsum("x,y,i->xyi", h(I, "h"), h(J, "h"), val)
            else:
                raise ValueError(variant)
    return out
