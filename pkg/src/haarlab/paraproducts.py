"""Paraproducts, the four-case reduction of the shift commutator and the
nine-term product expansion.

Every paraproduct here has the tensor form

    f  ->  sum_{t, u}  w_t w_u  B^(bx_t x by_u) <f, p_t (x) q_u>  o_t (x) o'_u

where each axis contributes a family of terms ``t`` built from one
:class:`AxisSlot`.  An axis slot says which profile (``"h"`` or ``"h1"``)
``f`` is paired against, which profile is emitted, and whether either of
them sits on a descendant of the symbol's interval (the parent-indexed
variants).  The weight ``w_t`` is ``|I|^{-1/2}`` of the symbol interval
times a sign for descendant slots.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .grid import (analyze2d, depth_of, haar_profiles, indicator_profiles,
                   l2norm, slot_levels, synthesize2d)
from .operators import (LinearOperatorHandle, adjoint_symbol, commutator2p, multiply,
                        shift_samples)


@dataclass(frozen=True)
class AxisSlot:
    pair: str = "h"            # profile paired with f: "h" or "h1"
    out: str = "h"             # emitted profile
    pair_child: bool = False   # pairing sits on a descendant of the symbol interval
    out_child: bool = False
    generation: int = 1
    sign: str = "haar"         # "haar": product of a_J signs along the path; "plus": all +1

    def dual(self) -> "AxisSlot":
        return replace(self, pair=self.out, out=self.pair,
                       pair_child=self.out_child, out_child=self.pair_child)

    @property
    def parent_indexed(self) -> bool:
        return self.pair_child or self.out_child


@lru_cache(maxsize=None)
def _axis_terms(depth: int, slot: AxisSlot):
    """Return (symbol slot, pair rows, out rows, weights) for one axis."""
    n = 2 ** depth
    H = haar_profiles(depth)
    H1 = indicator_profiles(depth)[:n]
    lev = slot_levels(depth)
    prof = {"h": H, "h1": H1}
    if slot.parent_indexed:
        g = slot.generation
        child = np.arange(2 ** g, n)
        bidx = child >> g
        w = 2.0 ** (lev[bidx] / 2)
        if slot.sign == "haar":
            sgn = np.ones(len(child))
            for i in range(g):
                sgn *= np.where((child >> i) % 2 == 0, 1.0, -1.0)
            w = w * sgn
        elif slot.sign != "plus":
            raise ValueError(f"unknown sign convention {slot.sign!r}")
        ppos = child if slot.pair_child else bidx
        opos = child if slot.out_child else bidx
    else:
        bidx = np.arange(1, n)
        w = 2.0 ** (lev[bidx] / 2)
        ppos = opos = bidx
    out = (bidx, prof[slot.pair][ppos], prof[slot.out][opos], w)
    for a in out:
        a.setflags(write=False)
    return out


def general_paraproduct_samples(symbol: np.ndarray, f: np.ndarray,
                                sx: AxisSlot, sy: AxisSlot) -> np.ndarray:
    """Apply a tensor-form paraproduct: ``symbol`` is a matrix spectrum, ``f`` cell samples."""
    n = f.shape[0]
    depth = depth_of(f)
    bx, px, ox, wx = _axis_terms(depth, sx)
    by, py, oy, wy = _axis_terms(depth, sy)
    pairing = np.einsum("tx,xyk,uy->tuk", px, f, py) / n ** 2
    coef = np.einsum("tuij,tuj->tui", symbol[np.ix_(bx, by)], pairing)
    coef *= np.outer(wx, wy)[..., None]
    return np.einsum("tx,tuk,uy->xyk", ox, coef, oy)


VARIANTS = {
    "P1": (AxisSlot("h", "h1"), AxisSlot("h", "h", pair_child=True, out_child=True)),
    "P2": (AxisSlot("h1", "h"), AxisSlot("h", "h", out_child=True)),
    "P3": (AxisSlot("h1", "h"), AxisSlot("h1", "h")),
    "P4": (AxisSlot("h", "h1"), AxisSlot("h1", "h")),
    "P5": (AxisSlot("h1", "h"), AxisSlot("h", "h1")),
}


@dataclass(frozen=True)
class ParaproductSpec:
    """One paraproduct with a matrix-valued symbol spectrum.

    ``slots`` overrides the variant's axis layout; adjoints and case pieces
    use it.  Only the fully cancellative coefficients of ``symbol`` enter.
    """

    variant: str
    symbol: np.ndarray = field(repr=False)
    sign: str = "haar"
    generation: int = 1
    slots: tuple[AxisSlot, AxisSlot] | None = None

    def __post_init__(self):
        if self.slots is None and self.variant not in VARIANTS:
            raise ValueError(f"unknown paraproduct variant {self.variant!r}")
        if self.generation not in (1, 2):
            raise ValueError("generation must be 1 or 2")

    def axis_slots(self) -> tuple[AxisSlot, AxisSlot]:
        if self.slots is not None:
            return self.slots
        sx, sy = VARIANTS[self.variant]
        if sy.parent_indexed:
            sy = replace(sy, sign=self.sign, generation=self.generation)
        return sx, sy


def apply_paraproduct_samples(p: ParaproductSpec, f: np.ndarray) -> np.ndarray:
    sx, sy = p.axis_slots()
    return general_paraproduct_samples(p.symbol, f, sx, sy)


def apply_paraproduct(p: ParaproductSpec, f: np.ndarray) -> np.ndarray:
    """Paraproduct on a vector spectrum, returning a vector spectrum."""
    return analyze2d(apply_paraproduct_samples(p, synthesize2d(f)))


_ADJOINT_LABEL = {"P1": "P1*", "P2": "P1", "P3": "P3*", "P4": "P4*", "P5": "P5*"}


def paraproduct_adjoint(p: ParaproductSpec) -> ParaproductSpec:
    """Exact adjoint: every axis slot is dualized and the symbol is conjugate-transposed.

    The adjoint of ``P2_B`` is labelled ``"P1"``: it pairs ``f`` with
    ``h_I (x) h_J`` at the child ``J`` and emits ``h1_I`` in ``x``, with
    symbol ``B*``; its ``y`` output sits on the parent ``J~``.
    """
    sx, sy = p.axis_slots()
    label = _ADJOINT_LABEL.get(p.variant, p.variant + "*")
    return ParaproductSpec(label, adjoint_symbol(p.symbol), p.sign, p.generation,
                           (sx.dual(), sy.dual()))


def paraproduct_operator(p: ParaproductSpec) -> LinearOperatorHandle:
    n, d = p.symbol.shape[0], p.symbol.shape[-1]
    adj = paraproduct_adjoint(p)
    return LinearOperatorHandle(
        shape=(n, n, d),
        apply=lambda c: apply_paraproduct(p, c),
        adjoint=lambda c: apply_paraproduct(adj, c),
        name=p.variant,
    )


# ---------------------------------------------------------------------------
# four-case reduction of [[M_B, Sh_1], Sh_2]

CASES = ("I=K,J=L", "I<K,J<L", "I=K,J<L", "I<K,J=L")

# In T1..T4 each variable carries either a product h_I h_K that is shifted
# afterwards ("M") or a product h_I Sh(h_K) ("S").
TERM_AXES = {1: ("S", "S"), 2: ("M", "S"), 3: ("S", "M"), 4: ("M", "M")}
TERM_SIGNS = {1: 1.0, 2: -1.0, 3: -1.0, 4: 1.0}

# Per-axis reduction of the restricted sums; "S" axes act on the pre-shifted input.
_AXIS_CASE_SLOTS = {
    ("M", "eq"): (AxisSlot("h", "h1"),),
    ("M", "lt"): (AxisSlot("h1", "h"),),
    ("S", "eq"): (AxisSlot("h", "h", pair_child=True, out_child=True),),
    ("S", "lt"): (AxisSlot("h1", "h"), AxisSlot("h", "h1")),
}


def _case_kinds(case_id: str) -> tuple[str, str]:
    if case_id not in CASES:
        raise ValueError(f"unknown case {case_id!r}; expected one of {CASES}")
    x, y = case_id.split(",")
    return ("eq" if "=" in x else "lt"), ("eq" if "=" in y else "lt")


def _shift_where(f: np.ndarray, axes) -> np.ndarray:
    for ax in axes:
        f = shift_samples(f, ax)
    return f


def case_samples(case_id: str, B: np.ndarray, f: np.ndarray, term: int = 2) -> np.ndarray:
    """Restricted piece of ``T_term`` (sign not applied) via the generic case engine.

    ``B`` is a matrix spectrum, ``f`` cell samples; both are assumed to have
    cancellative support on levels ``<= N - 2``.
    """
    kx, ky = _case_kinds(case_id)
    ax_kind = TERM_AXES[term]
    pre = [i for i, k in enumerate(ax_kind) if k == "S"]
    post = [i for i, k in enumerate(ax_kind) if k == "M"]
    g = _shift_where(f, pre)
    out = np.zeros(f.shape, dtype=complex)
    for sx in _AXIS_CASE_SLOTS[(ax_kind[0], kx)]:
        for sy in _AXIS_CASE_SLOTS[(ax_kind[1], ky)]:
            out += general_paraproduct_samples(B, g, sx, sy)
    return _shift_where(out, post)


def _t2_case_samples(case_id: str, B: np.ndarray, f: np.ndarray) -> np.ndarray:
    """The restricted pieces of ``T2`` written with the named paraproducts."""
    sh1 = lambda g: shift_samples(g, 0)  # noqa: E731
    sh2 = lambda g: shift_samples(g, 1)  # noqa: E731
    para = lambda v, g, **kw: apply_paraproduct_samples(ParaproductSpec(v, B, **kw), g)  # noqa: E731
    if case_id == "I=K,J=L":
        return sh1(para("P1", sh2(f)))
    if case_id == "I<K,J<L":
        g = sh2(f)
        return sh1(para("P3", g) + para("P5", g))
    if case_id == "I=K,J<L":
        g = sh2(f)
        dual3 = paraproduct_adjoint(ParaproductSpec("P3", adjoint_symbol(B)))
        return sh1(para("P4", g) + apply_paraproduct_samples(dual3, g))
    if case_id == "I<K,J=L":
        # the two children of J both carry +1; the 1/sqrt2 is the shift's
        return sh1(para("P2", f, sign="plus") / np.sqrt(2.0))
    raise ValueError(f"unknown case {case_id!r}; expected one of {CASES}")


def case_operator(case_id: str, B: np.ndarray, term: int = 2) -> LinearOperatorHandle:
    """Operator for one of the four cases of ``T~_term``; ``B`` is a matrix spectrum.

    For ``term = 2`` the pieces are the named compositions
    ``Sh1 P1 Sh2``, ``Sh1 (P3 + P5) Sh2``, ``Sh1 (P4 + (P3_{B*})*) Sh2`` and
    ``Sh1 P2``; the other terms come from the generic engine.
    """
    _case_kinds(case_id)
    n, d = B.shape[0], B.shape[-1]
    if term == 2:
        fwd = lambda c: analyze2d(_t2_case_samples(case_id, B, synthesize2d(c)))  # noqa: E731
    elif term in TERM_AXES:
        fwd = lambda c: analyze2d(case_samples(case_id, B, synthesize2d(c), term))  # noqa: E731
    else:
        raise ValueError(f"term must be 1..4, got {term}")

    def adjoint(c):
        raise NotImplementedError("case operators are only used in the forward direction")

    return LinearOperatorHandle((n, n, d), fwd, adjoint, name=f"T{term}[{case_id}]")


def restricted_term(B: np.ndarray, f: np.ndarray, term: int) -> np.ndarray:
    """``T~_term f`` (cell samples) assembled from its four cases."""
    if term == 2:
        return sum(_t2_case_samples(c, B, f) for c in CASES)
    return sum(case_samples(c, B, f, term) for c in CASES)


def decomposition_check(B: np.ndarray, f: np.ndarray) -> float:
    """Relative residual ``||[[M_B,Sh1],Sh2] f - (T~1 - T~2 - T~3 + T~4) f|| / ||f||``.

    ``B`` (matrix spectrum) and ``f`` (vector spectrum) should have fully
    cancellative support on levels ``<= N - 2``.
    """
    fs = synthesize2d(f)
    direct = _commutator_samples(B, fs)
    assembled = sum(TERM_SIGNS[t] * restricted_term(B, fs, t) for t in TERM_SIGNS)
    nf = l2norm(fs)
    return l2norm(direct - assembled) / nf if nf > 0 else l2norm(direct - assembled)


def _commutator_samples(B: np.ndarray, fs: np.ndarray) -> np.ndarray:
    return commutator2p(synthesize2d(B), fs)


def decomposition_record(B: np.ndarray, f: np.ndarray, case: str = "decomposition") -> dict:
    return {"case": case, "N": depth_of(f), "d": f.shape[-1],
            "residual": decomposition_check(B, f)}


# ---------------------------------------------------------------------------
# nine-term product expansion

# one-variable product: b g = m_b m_g + sum_I |I|^{-1/2} [b0 g0 h1 + b0 g1 h0 + b1 g0 h0]
_X_PATTERNS = {"a": (0, 0, 1), "b": (0, 1, 0), "c": (1, 0, 0)}
NINE_TERMS = (("a", "a"), ("a", "b"), ("a", "c"),
              ("c", "a"), ("c", "b"), ("c", "c"),
              ("b", "a"), ("b", "b"), ("b", "c"))


def _pattern_rows(depth: int, pattern):
    """Profiles of (B pairing, f pairing, output) and weights for a 1D pattern.

    ``pattern`` is a triple of kinds in {0, 1} over cancellative intervals,
    or ``"mean"`` for the global-mean bookkeeping term.
    """
    n = 2 ** depth
    if pattern == "mean":
        one = np.ones((1, n))
        return one, one, one, np.ones(1)
    H = haar_profiles(depth)[1:]
    H1 = indicator_profiles(depth)[1:n]
    prof = (H, H1)
    w = 2.0 ** (slot_levels(depth)[1:] / 2)
    return prof[pattern[0]], prof[pattern[1]], prof[pattern[2]], w


def _triple_term_samples(Bs: np.ndarray, f: np.ndarray, px, py) -> np.ndarray:
    n = f.shape[0]
    depth = depth_of(f)
    bx, fx, ox, wx = _pattern_rows(depth, px)
    by, fy, oy, wy = _pattern_rows(depth, py)
    bco = np.einsum("tx,xyij,uy->tuij", bx, Bs, by) / n ** 2
    fco = np.einsum("tx,xyk,uy->tuk", fx, f, fy) / n ** 2
    coef = np.einsum("tuij,tuj->tui", bco, fco) * np.outer(wx, wy)[..., None]
    return np.einsum("tx,tuk,uy->xyk", ox, coef, oy)


@dataclass
class NineTermExpansion:
    """``B f = T1 f + ... + T9 f + (mean bookkeeping) f`` for a sampled symbol ``B``.

    ``terms[i]`` is ``T_{i+1}``; ``mean_terms`` collects the seven pieces in
    which at least one variable carries the global mean.
    """

    terms: list[LinearOperatorHandle]
    mean_terms: LinearOperatorHandle
    patterns: list = field(default_factory=list)

    def all_terms(self) -> list[LinearOperatorHandle]:
        return self.terms + [self.mean_terms]


def nine_term_expand(B: np.ndarray) -> NineTermExpansion:
    """Expansion of multiplication by the sampled symbol ``B`` (``(n, n, d, d)``)."""
    n, d = B.shape[0], B.shape[-1]
    Bstar = adjoint_symbol(B)
    pats = [(_X_PATTERNS[a], _X_PATTERNS[b]) for a, b in NINE_TERMS]

    def handle(px, py, name):
        # adjoint: swap f-pairing and output roles, conjugate-transpose B
        def fwd(c):
            return analyze2d(_triple_term_samples(B, synthesize2d(c), px, py))

        def adj(c):
            sw = lambda p: p if p == "mean" else (p[0], p[2], p[1])  # noqa: E731
            return analyze2d(_triple_term_samples(Bstar, synthesize2d(c), sw(px), sw(py)))
        return LinearOperatorHandle((n, n, d), fwd, adj, name=name)

    terms = [handle(px, py, f"T{i + 1}") for i, (px, py) in enumerate(pats)]
    mean_pairs = [(px, py) for px in (*_X_PATTERNS.values(), "mean")
                  for py in (*_X_PATTERNS.values(), "mean") if "mean" in (px, py)]

    def mean_fwd(c):
        fs = synthesize2d(c)
        return analyze2d(sum(_triple_term_samples(B, fs, px, py) for px, py in mean_pairs))

    def mean_adj(c):
        fs = synthesize2d(c)
        sw = lambda p: p if p == "mean" else (p[0], p[2], p[1])  # noqa: E731
        return analyze2d(sum(_triple_term_samples(Bstar, fs, sw(px), sw(py)) for px, py in mean_pairs))

    means = LinearOperatorHandle((n, n, d), mean_fwd, mean_adj, name="means")
    return NineTermExpansion(terms, means, pats)


def product_identity_check(B: np.ndarray, f: np.ndarray) -> float:
    """Relative residual of ``sum_i T_i f = B f``; ``B`` and ``f`` are cell samples."""
    exp = nine_term_expand(B)
    c = analyze2d(f)
    total = synthesize2d(sum(t.apply(c) for t in exp.all_terms()))
    direct = multiply(B, f)
    scale = l2norm(direct)
    return l2norm(total - direct) / scale if scale > 0 else l2norm(total - direct)


def nine_term_commutator_check(B: np.ndarray, f: np.ndarray) -> float:
    """Relative residual of ``sum_i [[T_i, Sh1], Sh2] f = [[M_B, Sh1], Sh2] f`` (samples)."""
    exp = nine_term_expand(B)
    sh = [lambda g, a=a: shift_samples(g, a) for a in (0, 1)]
    total = np.zeros(f.shape, dtype=complex)
    for t in exp.all_terms():
        T = lambda g, t=t: synthesize2d(t.apply(analyze2d(g)))  # noqa: E731
        total += (T(sh[0](sh[1](f))) - sh[0](T(sh[1](f)))
                  - sh[1](T(sh[0](f))) + sh[1](sh[0](T(f))))
    direct = commutator2p(B, f)
    scale = max(l2norm(direct), l2norm(f))
    return l2norm(total - direct) / scale if scale > 0 else 0.0


def product_record(B: np.ndarray, f: np.ndarray) -> dict:
    return {"case": "nine-term", "N": depth_of(f), "d": f.shape[-1],
            "residual": product_identity_check(B, f)}


def record_json(rec: dict) -> str:
    return json.dumps(rec)
