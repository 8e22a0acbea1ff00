"""Symbol generators, the sandwich and lower-bound experiments, and suite orchestration."""
from __future__ import annotations

import dataclasses
import datetime as _dt
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import bmo as _bmo
from . import hilbert as _hil
from . import oracles
from . import paraproducts as _pp
from .grid import (GridConfig, analyze2d, cancellative_mask, inner, l2norm, slot_levels,
                   synthesize2d)
from .operators import (NoConvergence, adjoint_symbol, commutator2p, commutator_operator,
                        operator_norm, shift_x, shift_y)

BACKENDS = ("shift", "hilbert")
GENERATORS = ("random-gaussian", "single-rectangle", "scalar-embedded",
              "diagonal-scalars", "rank-one")
SUITES = ("identities", "paraproducts", "bmo", "sandwich", "lower-bound", "petermichl")


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit status 2)."""


# ---------------------------------------------------------------------------
# configuration

@dataclass(frozen=True)
class ExperimentConfig:
    depth: int = 3
    dim: int = 1
    trials: int = 10
    tolerance: float = 1e-10
    backend: str = "shift"
    generator: str = "random-gaussian"
    seed: int = 0
    out: str | None = None

    def __post_init__(self):
        try:
            GridConfig(self.depth, self.dim, self.seed)
        except (ValueError, TypeError) as exc:
            raise ConfigError(str(exc)) from None
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError(f"trials must be a positive integer, got {self.trials!r}")
        if not (isinstance(self.tolerance, (int, float)) and 0 < self.tolerance < 1):
            raise ConfigError(f"tolerance must lie in (0, 1), got {self.tolerance!r}")
        if self.backend not in BACKENDS:
            raise ConfigError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        if self.generator not in GENERATORS:
            raise ConfigError(f"generator must be one of {GENERATORS}, got {self.generator!r}")

    @classmethod
    def from_mapping(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def trial_rngs(self, count: int | None = None, stream: int = 0) -> list[np.random.Generator]:
        """Per-trial generators split from the master seed (``stream`` separates suites)."""
        ss = np.random.SeedSequence([self.seed, stream])
        return [np.random.default_rng(s) for s in ss.spawn(count or self.trials)]


# ---------------------------------------------------------------------------
# generators

@dataclass(frozen=True)
class SymbolSpec:
    """What :func:`generate_symbol` should build.

    ``rect`` is a pair of heap slots ``(px, py)``; ``matrix`` a ``d x d``
    coefficient; ``scalar`` a scalar spectrum of shape ``(n, n)``; ``i, j``
    are zero-based matrix positions.  ``max_level`` limits the cancellative
    levels used by the random generators.
    """

    kind: str
    rect: tuple[int, int] = (1, 1)
    matrix: Any = None
    scalar: Any = None
    i: int = 0
    j: int = 0
    max_level: int | None = None


def _as_spec(spec) -> SymbolSpec:
    if isinstance(spec, SymbolSpec):
        s = spec
    elif isinstance(spec, str):
        s = SymbolSpec(spec)
    else:
        raise ValueError(f"cannot interpret symbol spec {spec!r}")
    if s.kind not in GENERATORS:
        raise ValueError(f"unknown symbol spec {s.kind!r}; expected one of {GENERATORS}")
    return s


def _complex_normal(rng, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _scale(depth: int, max_level: int | None) -> np.ndarray:
    """``sqrt|R|`` on cancellative slots up to ``max_level``, zero elsewhere."""
    lev = slot_levels(depth)
    s = 2.0 ** (-(lev[:, None] + lev[None, :]) / 2)
    return s * cancellative_mask(depth, max_level)


def random_scalar_symbol(depth: int, rng: np.random.Generator, max_level: int | None = None) -> np.ndarray:
    n = 2 ** depth
    return _complex_normal(rng, (n, n)) * _scale(depth, max_level)


def generate_symbol(spec, depth: int, dim: int, seed: int | np.random.Generator = 0) -> np.ndarray:
    """Matrix spectrum ``(n, n, d, d)`` with only cancellative coefficients."""
    s = _as_spec(spec)
    GridConfig(depth, dim)
    n = 2 ** depth
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    B = np.zeros((n, n, dim, dim), dtype=complex)
    scale = _scale(depth, s.max_level)[..., None, None]
    if s.kind == "random-gaussian":
        B = _complex_normal(rng, B.shape) * scale
    elif s.kind == "single-rectangle":
        px, py = s.rect
        if not (1 <= px < n and 1 <= py < n):
            raise ValueError(f"rectangle slots {s.rect} are not cancellative at depth {depth}")
        A = _complex_normal(rng, (dim, dim)) if s.matrix is None else np.asarray(s.matrix, dtype=complex)
        if A.shape != (dim, dim):
            raise ValueError("matrix must be d x d")
        B[px, py] = A
    elif s.kind == "scalar-embedded":
        if not (0 <= s.i < dim and 0 <= s.j < dim):
            raise ValueError("entry position out of range")
        b = random_scalar_symbol(depth, rng, s.max_level) if s.scalar is None else np.asarray(s.scalar)
        B[..., s.i, s.j] = b * cancellative_mask(depth)
    elif s.kind == "diagonal-scalars":
        for k in range(dim):
            B[..., k, k] = random_scalar_symbol(depth, rng, s.max_level)
    elif s.kind == "rank-one":
        u = _complex_normal(rng, (n, n, dim))
        v = _complex_normal(rng, (n, n, dim))
        B = np.einsum("xyi,xyj->xyij", u, v.conj()) * scale
    return B


def random_field(depth: int, dim: int, rng: np.random.Generator, max_level: int | None = None,
                 cancellative: bool = False) -> np.ndarray:
    """Random vector spectrum ``(n, n, d)``; optionally restricted to cancellative levels."""
    n = 2 ** depth
    f = _complex_normal(rng, (n, n, dim))
    if cancellative or max_level is not None:
        f = f * cancellative_mask(depth, max_level)[..., None]
    return f


def entry_symbol(B: np.ndarray, i: int, j: int) -> np.ndarray:
    """``B~_ij = b_ij E_ij`` as a matrix spectrum."""
    out = np.zeros_like(B)
    out[..., i, j] = B[..., i, j]
    return out


# ---------------------------------------------------------------------------
# norms

def commutator_norm(B: np.ndarray, backend: str = "shift", method: str = "auto",
                    seed: int = 0) -> tuple[float, bool]:
    """``(||[[M_B, T1], T2]||, converged)`` for a matrix spectrum ``B``."""
    T = commutator_operator(synthesize2d(B), backend)
    try:
        return operator_norm(T, tol=1e-12, seed=seed, method=method), True
    except NoConvergence as exc:
        return exc.estimate, False


@dataclass
class SandwichRecord:
    trial: int
    generator: str
    backend: str
    bmo: float
    comm_norm: float
    ratio: float | None
    entry_norms: list[list[float]]
    degenerate: bool = False
    converged: bool = True

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


DEGENERATE_BMO = 1e-12


def sandwich_experiment(config: ExperimentConfig, backends: tuple[str, ...] | None = None,
                        entry_norms: bool = True, symbols=None) -> list[SandwichRecord]:
    """One record per trial and backend: BMO norm, commutator norm and their ratio.

    ``symbols`` replaces the configured generator with explicit spectra.
    Symbols with (numerically) vanishing BMO norm are marked degenerate and
    carry ``ratio = None``.  Non-convergent norm estimates are flagged, not fatal.
    """
    backends = backends or (config.backend,)
    family = _bmo.default_family(config.depth, config.seed)
    gen_id = config.generator if symbols is None else "explicit"
    if symbols is None:
        symbols = (generate_symbol(config.generator, config.depth, config.dim, rng)
                   for rng in config.trial_rngs(stream=1))
    records = []
    for t, B in enumerate(symbols):
        b = _bmo.bmo_norm(B, family).openset_norm
        for backend in backends:
            norm, ok = commutator_norm(B, backend, seed=t)
            entries = []
            if entry_norms:
                for i in range(config.dim):
                    row = []
                    for j in range(config.dim):
                        v, ok_ij = commutator_norm(B[..., i:i + 1, j:j + 1], backend, seed=t)
                        ok = ok and ok_ij
                        row.append(v)
                    entries.append(row)
            degenerate = b <= DEGENERATE_BMO
            ratio = None if degenerate else norm / b
            records.append(SandwichRecord(t, gen_id, backend, b, norm, ratio,
                                          entries, degenerate, ok))
    return records


def sandwich_summary(records: list[SandwichRecord]) -> dict:
    out = {}
    for backend in sorted({r.backend for r in records}):
        rs = [r.ratio for r in records if r.backend == backend and r.ratio is not None]
        summ = {"trials": sum(r.backend == backend for r in records),
                "degenerate": sum(r.degenerate for r in records if r.backend == backend),
                "nonconverged": sum(not r.converged for r in records if r.backend == backend),
                "ratios_finite": all(math.isfinite(x) for x in rs),
                "ratios_positive": all(x > 0 for x in rs)}
        if rs:
            summ.update(min=min(rs), max=max(rs), spread=max(rs) / min(rs) if min(rs) > 0 else None)
        out[backend] = summ
    return out


def lower_bound_reduction_check(B: np.ndarray, trials: int = 5, backend: str = "shift",
                                seed: int = 0, family: _bmo.TestSetFamily | None = None) -> dict:
    """Check the scalar-to-matrix reduction for the commutator of ``B``.

    (a) ``<C_B(f e_i), g e_j> = <C_{b_ji} f, g>`` on random scalar ``f, g``;
    (b) ``||C_{b_ji}|| <= ||C_B||``;
    (c) ``||B||_BMO <= sum_ij ||B~_ij||_BMO`` over the same family.
    The ratio ``||C_B|| / ||B||_BMO`` is reported, not asserted.
    """
    n, d = B.shape[0], B.shape[-1]
    depth = n.bit_length() - 1
    rng = np.random.default_rng(seed)
    Bs = synthesize2d(B)
    T = commutator_operator(Bs, backend)
    scalar_ops = {(i, j): commutator_operator(Bs[..., i:i + 1, j:j + 1], backend)
                  for i in range(d) for j in range(d)}

    pairing_err = 0.0
    for _ in range(trials):
        f = _complex_normal(rng, (n, n))
        g = _complex_normal(rng, (n, n))
        scale = l2norm(f) * l2norm(g) * max(np.abs(Bs).max(), 1e-300)
        for i in range(d):
            fe = np.zeros((n, n, d), dtype=complex)
            fe[..., i] = f
            out = synthesize2d(T.apply(analyze2d(fe)))
            for j in range(d):
                lhs = inner(out[..., j:j + 1], g[..., None])
                s_out = synthesize2d(scalar_ops[(j, i)].apply(analyze2d(f[..., None])))
                rhs = inner(s_out, g[..., None])
                pairing_err = max(pairing_err, abs(lhs - rhs) / scale)

    method = "dense" if T.size <= 512 else "lanczos"
    full = operator_norm(T, method=method, seed=seed)
    entry = [[operator_norm(scalar_ops[(i, j)], method=method, seed=seed) for j in range(d)]
             for i in range(d)]
    worst_entry = max(max(r) for r in entry)

    family = family or _bmo.default_family(depth, seed)
    bnorm = _bmo.bmo_norm(B, family).openset_norm
    entry_bmo = [[_bmo.bmo_norm(entry_symbol(B, i, j), family).openset_norm for j in range(d)]
                 for i in range(d)]
    chain_rhs = float(sum(map(sum, entry_bmo)))

    return {
        "backend": backend,
        "pairing_max_rel_err": pairing_err,
        "pairing_ok": pairing_err <= 1e-10,
        "comm_norm": full,
        "entry_comm_norms": entry,
        "norm_ineq_ok": worst_entry <= full + 1e-9,
        "bmo": bnorm,
        "entry_bmo": entry_bmo,
        "chain_rhs": chain_rhs,
        "chain_ok": bnorm <= chain_rhs + 1e-9,
        "ratio": full / bnorm if bnorm > DEGENERATE_BMO else None,
        "ratio_times_d2": d * d * full / bnorm if bnorm > DEGENERATE_BMO else None,
    }


# ---------------------------------------------------------------------------
# suites

@dataclass
class Section:
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def check(self, name: str, value, limit, passed: bool | None = None, kind: str = "le"):
        """Record a hard assertion ``value <= limit`` (or a boolean outcome)."""
        if passed is None:
            passed = value is not None and math.isfinite(value) and (
                value <= limit if kind == "le" else value >= limit)
        self.checks.append({"name": name, "value": value, "limit": limit, "passed": bool(passed)})

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": self.checks, "data": self.data}


def _rel(a, b) -> float:
    nb = np.linalg.norm(b)
    return float(np.linalg.norm(a - b) / nb) if nb > 0 else float(np.linalg.norm(a - b))


def suite_identities(cfg: ExperimentConfig, ctx: dict) -> Section:
    sec = Section()
    N, d, tol = cfg.depth, cfg.dim, cfg.tolerance
    rngs = cfg.trial_rngs(stream=10)
    rt = pars = iso = comm = const = quad = dec = nine = ninec = adj = 0.0
    for rng in rngs:
        f = _complex_normal(rng, (2 ** N, 2 ** N, d))
        c = analyze2d(f)
        rt = max(rt, _rel(synthesize2d(c), f))
        pars = max(pars, abs(l2norm(f) - float(np.linalg.norm(c))) / l2norm(f))
        s = random_field(N, d, rng, max_level=max(N - 2, 0))
        if N >= 2:
            for sh in (shift_x, shift_y):
                iso = max(iso, abs(float(np.linalg.norm(sh(s))) - float(np.linalg.norm(s))) / float(np.linalg.norm(s)))
        comm = max(comm, float(np.abs(shift_x(shift_y(c)) - shift_y(shift_x(c))).max()))
        A = _complex_normal(rng, (d, d))
        Bc = np.broadcast_to(A, (2 ** N, 2 ** N, d, d))
        const = max(const, float(np.abs(commutator2p(Bc, f)).max()))
        B = generate_symbol("random-gaussian", N, d, rng)
        fc = random_field(N, d, rng)
        if N <= 4:
            quad = max(quad, _rel(oracles.quadruple_sum(B, fc), commutator2p(synthesize2d(B), synthesize2d(fc))))
        Bsafe = generate_symbol(SymbolSpec("random-gaussian", max_level=max(N - 2, 0)), N, d, rng)
        fsafe = random_field(N, d, rng, max_level=max(N - 2, 0))
        dec = max(dec, _pp.decomposition_check(Bsafe, fsafe))
        Bs, fs = synthesize2d(B), synthesize2d(fc)
        nine = max(nine, _pp.product_identity_check(Bs, fs))
        ninec = max(ninec, _pp.nine_term_commutator_check(Bs, fs))
        T = commutator_operator(synthesize2d(B), cfg.backend)
        g = random_field(N, d, rng)
        lhs = np.vdot(g, T.apply(fc))
        rhs = np.vdot(T.adjoint(g), fc)
        adj = max(adj, abs(lhs - rhs) / (np.linalg.norm(fc) * np.linalg.norm(g) * max(1.0, np.abs(B).max())))
    sec.check("haar_roundtrip", rt, tol)
    sec.check("parseval", pars, tol)
    sec.check("shift_isometry_safe", iso, tol)
    sec.check("shift_xy_commute", comm, tol)
    sec.check("commutator_constant_symbol", const, tol)
    if N <= 4:
        sec.check("quadruple_sum_equivalence", quad, tol)
    sec.check("case_decomposition", dec, tol)
    sec.check("nine_term_product", nine, tol)
    sec.check("nine_term_commutator", ninec, tol)
    sec.check("commutator_adjoint", float(adj), tol)
    sec.data["records"] = [_pp.decomposition_record(Bsafe, fsafe), _pp.product_record(Bs, fs)]
    return sec


def suite_paraproducts(cfg: ExperimentConfig, ctx: dict) -> Section:
    sec = Section()
    N, d, tol = cfg.depth, cfg.dim, cfg.tolerance
    family = _bmo.default_family(N, cfg.seed)
    direct = adj = dual1 = dual2 = 0.0
    pointwise = -np.inf
    bounded = {v: 0.0 for v in _pp.VARIANTS}
    for rng in cfg.trial_rngs(stream=20):
        B = generate_symbol(cfg.generator, N, d, rng)
        fs = synthesize2d(random_field(N, d, rng))
        gs = synthesize2d(random_field(N, d, rng))
        nf, ng = l2norm(fs), l2norm(gs)
        bnorm = _bmo.bmo_norm(B, family).openset_norm
        for v in _pp.VARIANTS:
            spec = _pp.ParaproductSpec(v, B)
            out = _pp.apply_paraproduct_samples(spec, fs)
            if N <= 4:
                direct = max(direct, _rel(out, oracles.direct_paraproduct(v, B, fs)))
            lhs = inner(out, gs)
            rhs = inner(fs, _pp.apply_paraproduct_samples(_pp.paraproduct_adjoint(spec), gs))
            adj = max(adj, abs(lhs - rhs) / (nf * ng * max(1.0, np.abs(B).max())))
            if bnorm > DEGENERATE_BMO:
                bounded[v] = max(bounded[v], l2norm(out) / nf / (d * bnorm))
        p3 = inner(_pp.apply_paraproduct_samples(_pp.ParaproductSpec("P3", B), fs), gs)
        p4 = inner(_pp.apply_paraproduct_samples(_pp.ParaproductSpec("P4", B), fs), gs)
        scale = nf * ng * max(1.0, np.abs(B).max())
        dual1 = max(dual1, abs(p3 - _bmo.matrix_pairing(B, _bmo.pi1(fs, gs))) / scale)
        dual2 = max(dual2, abs(p4 - _bmo.matrix_pairing(B, _bmo.pi2(fs, gs))) / scale)
        lhs_pw = _bmo.square_function(_bmo.pi1(fs, gs))
        rhs_pw = _bmo.strong_maximal(np.linalg.norm(fs, axis=-1)) * _bmo.square_function(analyze2d(gs))
        pointwise = max(pointwise, float((lhs_pw - rhs_pw).max()))
    if N <= 4:
        sec.check("direct_summation_oracle", direct, tol)
    sec.check("adjoint_identities", float(adj), tol)
    sec.check("duality_P3_pi1", float(dual1), tol)
    sec.check("duality_P4_pi2", float(dual2), tol)
    sec.check("pointwise_square_maximal", pointwise, 1e-12)
    sec.check("boundedness_finite", max(bounded.values()), float("inf"),
              passed=all(math.isfinite(x) for x in bounded.values()))
    sec.data["boundedness_constants"] = bounded
    return sec


def suite_bmo(cfg: ExperimentConfig, ctx: dict) -> Section:
    sec = Section()
    N, d = cfg.depth, cfg.dim
    family = _bmo.default_family(N, cfg.seed)
    exhaustive = _bmo.exhaustive_family(N) if N <= 2 else None
    exh = sym = scal = trace = mono = replay = 0.0
    carl = []
    stilde = 0.0
    first = None
    for t, rng in enumerate(cfg.trial_rngs(stream=30)):
        B = generate_symbol(cfg.generator, N, d, rng)
        rep = _bmo.bmo_norm(B, family)
        if first is None:
            first = (B, rep)
        if exhaustive is not None:
            exh = max(exh, abs(rep.openset_norm - _bmo.bmo_norm(B, exhaustive).openset_norm))
        sym = max(sym, abs(rep.openset_norm - _bmo.bmo_norm(adjoint_symbol(B), family).openset_norm))
        c = complex(rng.standard_normal(), rng.standard_normal())
        scal = max(scal, abs(_bmo.bmo_norm(c * B, family).openset_norm - abs(c) * rep.openset_norm))
        mono = max(mono, rep.rect_norm - rep.openset_norm)
        try:
            lhs, bound = _bmo.trace_bound_check(B, family)
            trace = max(trace, lhs / bound if bound > 0 else 0.0)
        except _bmo.BoundViolation:
            trace = float("inf")
        cells = rep.witness_cells
        w = _bmo.bmo_on_cells(B, cells)
        replay = max(replay, abs(w[rep.order] - rep.openset_norm))
        if t < 3:
            res = _bmo.carleson_check(_bmo.carleson_weights(B), trials=4, family=family, seed=t, steps=100)
            carl.append({"c1_emp": res.c1_emp, "c2": res.c2, "c1_exact": res.c1_exact, "ratio": res.ratio})
        f = synthesize2d(random_field(N, d, rng))
        stilde = max(stilde, l2norm(_bmo.stilde(f)) / l2norm(f))
    tol = 1e-12
    if exhaustive is not None:
        sec.check("exhaustive_oracle_equivalence", exh, tol)
    sec.check("order_symmetry", sym, 1e-10)
    sec.check("scaling", scal, 1e-10)
    sec.check("rect_le_openset", mono, 1e-12)
    sec.check("trace_bound_ratio", trace, 1 + 1e-9)
    sec.check("witness_replay", replay, 1e-12)
    ok = all(c["c1_emp"] <= c["c1_exact"] * (1 + 1e-9) + 1e-12 and c["c2"] <= c["c1_exact"] * (1 + 1e-9) + 1e-12
             for c in carl)
    sec.check("carleson_consistent", len(carl), 0, passed=ok)
    sec.data["carleson"] = carl
    sec.data["stilde_max_ratio"] = stilde
    B, rep = first
    sec.data["first_report"] = json.loads(rep.to_json())
    if ctx.get("witness") is not None:
        sec.data["witness_replay"] = _bmo.bmo_on_cells(B, ctx["witness"])
    return sec


def suite_sandwich(cfg: ExperimentConfig, ctx: dict) -> Section:
    sec = Section()
    recs = sandwich_experiment(cfg, backends=ctx.get("backends"))
    summary = sandwich_summary(recs)
    for backend, s in summary.items():
        sec.check(f"{backend}_ratios_finite_positive", s.get("min"), 0.0,
                  passed=s["ratios_finite"] and s["ratios_positive"] and "min" in s)
    sec.data["summary"] = summary
    sec.data["records"] = [r.to_dict() for r in recs]
    if ctx.get("emit_csv") and recs:
        rng = cfg.trial_rngs(stream=1)[0]
        B = generate_symbol(cfg.generator, cfg.depth, cfg.dim, rng)
        T = commutator_operator(synthesize2d(B), cfg.backend)
        if T.size <= 1024:
            path = Path(ctx["emit_csv"]) / f"commutator_{cfg.backend}_trial0.csv"
            T.to_csv(path)
            sec.data["csv"] = [str(path)]
    return sec


def suite_lower_bound(cfg: ExperimentConfig, ctx: dict) -> Section:
    sec = Section()
    rng = cfg.trial_rngs(1, stream=40)[0]
    B = generate_symbol(cfg.generator, cfg.depth, cfg.dim, rng)
    backends = ctx.get("backends") or (cfg.backend,)
    for backend in backends:
        rep = lower_bound_reduction_check(B, trials=cfg.trials, backend=backend, seed=cfg.seed)
        sec.check(f"{backend}_pairing_identity", rep["pairing_max_rel_err"], 1e-10)
        sec.check(f"{backend}_entry_norm_inequality", max(max(r) for r in rep["entry_comm_norms"]) - rep["comm_norm"], 1e-9)
        sec.check(f"{backend}_bmo_chain", rep["bmo"] - rep["chain_rhs"], 1e-9)
        sec.data[backend] = rep
    return sec


def suite_petermichl(cfg: ExperimentConfig, ctx: dict) -> Section:
    sec = Section()
    N = max(cfg.depth, 2)
    n = 2 ** N
    sizes = [s for s in (1, 4, 16) if s < n] + [n]
    residuals = []
    for s in sizes:
        grids = [_hil.ShiftedGrid(a, 1.0, N) for a in _hil.alpha_subgroup(n, s)]
        K, rep = _hil.petermichl_average(grids)
        residuals.append(rep)
        if ctx.get("emit_csv") and s == n:
            path = Path(ctx["emit_csv"]) / f"petermichl_kernel_N{N}.csv"
            K.to_csv(path)
            sec.data["csv"] = [str(path)]
    worst = max((residuals[k + 1]["residual_rel"] - residuals[k]["residual_rel"]
                 for k in range(len(residuals) - 1)), default=0.0)
    sec.check("residual_non_increasing", worst, 1e-12)
    sec.data["alpha_sizes"] = sizes
    sec.data["fits"] = residuals
    return sec


_SUITE_FUNCS: dict[str, Callable[[ExperimentConfig, dict], Section]] = {
    "identities": suite_identities,
    "paraproducts": suite_paraproducts,
    "bmo": suite_bmo,
    "sandwich": suite_sandwich,
    "lower-bound": suite_lower_bound,
    "petermichl": suite_petermichl,
}


def run_suite(name: str, config: ExperimentConfig | None = None, witness=None,
              emit_csv: str | None = None, backends: tuple[str, ...] | None = None) -> tuple[int, dict]:
    """Run one suite (or ``"all"``) and return ``(exit status, report)``.

    The report is written to ``config.out`` when set.  Status is 0 when every
    hard check passes, 1 otherwise.
    """
    config = config or ExperimentConfig()
    if name != "all" and name not in _SUITE_FUNCS:
        raise ConfigError(f"unknown suite {name!r}; expected one of {SUITES + ('all',)}")
    names = list(SUITES) if name == "all" else [name]
    ctx = {"witness": witness, "emit_csv": emit_csv, "backends": backends}
    if emit_csv:
        Path(emit_csv).mkdir(parents=True, exist_ok=True)
    sections = {}
    for nm in names:
        sections[nm] = _SUITE_FUNCS[nm](config, ctx).to_dict()
    failures = [{"section": nm, **c} for nm, s in sections.items() for c in s["checks"] if not c["passed"]]
    report = {
        "suite": name,
        "config": config.to_dict(),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "passed": not failures,
        "failures": failures,
        "sections": sections,
    }
    if config.out:
        Path(config.out).write_text(report_json(report))
    return (0 if not failures else 1), report


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def report_json(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, sort_keys=True, default=_jsonable)


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x
