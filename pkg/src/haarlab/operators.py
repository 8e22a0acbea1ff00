"""Dyadic shifts, multiplication by a matrix symbol, commutators, operator norms."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, LinearOperator, eigsh

from .grid import (DimensionMismatch, analyze1d, analyze2d, slot_levels,
                   synthesize1d, synthesize2d)

SQRT_HALF = 1.0 / np.sqrt(2.0)


# ---------------------------------------------------------------------------
# shifts in coefficient space

def shift1d(s: np.ndarray, axis: int = 0) -> np.ndarray:
    """Dyadic shift of a coefficient array along ``axis``.

    ``out[I] = a_I * s[parent(I)]`` for every representable ``I`` of level >= 1.
    Inputs at the finest cancellative level and the mean slot are annihilated,
    since their images would need level-``N`` Haar functions.
    """
    s = np.moveaxis(np.asarray(s), axis, 0)
    n = s.shape[0]
    out = np.zeros(s.shape, dtype=np.result_type(s, np.float64))
    if n >= 4:
        p = np.arange(2, n)
        sign = np.where(p % 2 == 0, SQRT_HALF, -SQRT_HALF)
        out[2:] = sign.reshape((-1,) + (1,) * (s.ndim - 1)) * s[p // 2]
    return np.moveaxis(out, 0, axis)


def shift1d_adjoint(s: np.ndarray, axis: int = 0) -> np.ndarray:
    s = np.moveaxis(np.asarray(s), axis, 0)
    n = s.shape[0]
    out = np.zeros(s.shape, dtype=np.result_type(s, np.float64))
    if n >= 4:
        half = n // 2
        out[1:half] = SQRT_HALF * (s[2:n:2] - s[3:n:2])
    return np.moveaxis(out, 0, axis)


def shift_x(spec: np.ndarray) -> np.ndarray:
    return shift1d(spec, axis=0)


def shift_y(spec: np.ndarray) -> np.ndarray:
    return shift1d(spec, axis=1)


def shift_samples(f: np.ndarray, axis: int = 0) -> np.ndarray:
    """Apply the dyadic shift along ``axis`` to cell samples."""
    return synthesize1d(shift1d(analyze1d(f, axis), axis), axis)


def shift_samples_adjoint(f: np.ndarray, axis: int = 0) -> np.ndarray:
    return synthesize1d(shift1d_adjoint(analyze1d(f, axis), axis), axis)


# ---------------------------------------------------------------------------
# multiplication and commutators in sample space

def multiply(B: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Cellwise matrix-vector product ``B(x) f(x)``; ``B`` is ``(..., d, d)``, ``f`` is ``(..., d)``."""
    if B.shape[:-1] != f.shape or B.shape[-1] != f.shape[-1]:
        raise DimensionMismatch(f"symbol {B.shape} incompatible with field {f.shape}")
    return np.einsum("...ij,...j->...i", B, f)


def adjoint_symbol(B: np.ndarray) -> np.ndarray:
    """Pointwise (or coefficientwise) conjugate transpose."""
    return np.conj(np.swapaxes(B, -1, -2))


def commutator1p(B: np.ndarray, f: np.ndarray, axis: int = 0,
                 op: Callable[[np.ndarray], np.ndarray] | None = None) -> np.ndarray:
    """``B Sh(f) - Sh(B f)`` with the shift acting along ``axis``."""
    if op is None:
        op = lambda g: shift_samples(g, axis)  # noqa: E731
    return multiply(B, op(f)) - op(multiply(B, f))


def iterated_commutator(B: np.ndarray, f: np.ndarray,
                        op_x: Callable[[np.ndarray], np.ndarray],
                        op_y: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """``[[M_B, T1], T2] f = B T1 T2 f - T1 B T2 f - T2 B T1 f + T2 T1 B f``."""
    t2f = op_y(f)
    t1f = op_x(f)
    return (multiply(B, op_x(t2f)) - op_x(multiply(B, t2f))
            - op_y(multiply(B, t1f)) + op_y(op_x(multiply(B, f))))


def commutator2p(B: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Two-parameter commutator ``[[M_B, Sh_1], Sh_2] f`` on cell samples."""
    return iterated_commutator(B, f, lambda g: shift_samples(g, 0), lambda g: shift_samples(g, 1))


# ---------------------------------------------------------------------------
# matrix-free handles

@dataclass
class LinearOperatorHandle:
    """Linear map on vector spectra of shape ``(n, n, d)``.

    ``apply`` and ``adjoint`` take and return coefficient arrays.  A dense
    matrix (acting on the row-major flattening) can be materialized for
    oracle comparisons.
    """

    shape: tuple[int, int, int]
    apply: Callable[[np.ndarray], np.ndarray]
    adjoint: Callable[[np.ndarray], np.ndarray]
    name: str = "operator"
    matrix: np.ndarray | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.apply(x)

    def materialize(self) -> np.ndarray:
        if self.matrix is None:
            cols = []
            e = np.zeros(self.size, dtype=complex)
            for k in range(self.size):
                e[k] = 1.0
                cols.append(np.asarray(self.apply(e.reshape(self.shape)), dtype=complex).reshape(-1))
                e[k] = 0.0
            self.matrix = np.stack(cols, axis=1)
        return self.matrix

    def to_csv(self, path) -> None:
        """Row-major dense matrix; every entry occupies two columns ``re, im``."""
        m = self.materialize()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            for row in m:
                w.writerow([f"{v:.17g}" for z in row for v in (z.real, z.imag)])


def _sample_space_handle(shape, fwd, adj, name) -> LinearOperatorHandle:
    return LinearOperatorHandle(
        shape=shape,
        apply=lambda c: analyze2d(fwd(synthesize2d(c))),
        adjoint=lambda c: analyze2d(adj(synthesize2d(c))),
        name=name,
    )


def shift_operator(depth: int, dim: int, axis: int = 0, max_level: int | None = None) -> LinearOperatorHandle:
    """Shift along ``axis``; with ``max_level`` the input is first restricted to
    slots of that ``axis`` with level <= ``max_level`` (means dropped)."""
    n = 2 ** depth
    keep = np.ones(n, dtype=bool)
    if max_level is not None:
        keep = (np.arange(n) >= 1) & (slot_levels(depth) <= max_level)
    proj_shape = [1, 1, 1]
    proj_shape[axis] = n
    proj = keep.reshape(proj_shape)
    return LinearOperatorHandle(
        shape=(n, n, dim),
        apply=lambda c: shift1d(c * proj, axis),
        adjoint=lambda c: shift1d_adjoint(c, axis) * proj,
        name=f"shift_{'xy'[axis]}",
    )


def multiplication_operator(B: np.ndarray) -> LinearOperatorHandle:
    n, d = B.shape[0], B.shape[-1]
    Bs = adjoint_symbol(B)
    return _sample_space_handle((n, n, d), lambda f: multiply(B, f), lambda f: multiply(Bs, f), "M_B")


def commutator_operator(B: np.ndarray, backend: str = "shift") -> LinearOperatorHandle:
    """``[[M_B, T_1], T_2]`` for the shift or discrete Hilbert backend; ``B`` in samples."""
    n, d = B.shape[0], B.shape[-1]
    Bs = adjoint_symbol(B)
    if backend == "shift":
        ox, oy = (lambda g: shift_samples(g, 0)), (lambda g: shift_samples(g, 1))
        ax, ay = (lambda g: shift_samples_adjoint(g, 0)), (lambda g: shift_samples_adjoint(g, 1))
    elif backend == "hilbert":
        from .hilbert import hilbert_x, hilbert_y
        ox, oy = hilbert_x, hilbert_y
        ax, ay = (lambda g: -hilbert_x(g)), (lambda g: -hilbert_y(g))
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return _sample_space_handle(
        (n, n, d),
        lambda f: iterated_commutator(B, f, ox, oy),
        lambda f: iterated_commutator(Bs, f, ax, ay),
        f"[[M_B,{backend}_1],{backend}_2]",
    )


def dense_operator(matrix: np.ndarray, shape: tuple[int, ...] | None = None) -> LinearOperatorHandle:
    m = np.asarray(matrix)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch("dense_operator expects a square matrix")
    shape = shape or (m.shape[0],)
    mh = m.conj().T
    return LinearOperatorHandle(
        shape=tuple(shape),
        apply=lambda x: (m @ x.reshape(-1)).reshape(shape),
        adjoint=lambda x: (mh @ x.reshape(-1)).reshape(shape),
        name="dense",
        matrix=m,
    )


# ---------------------------------------------------------------------------
# operator norm

class NoConvergence(RuntimeError):
    def __init__(self, estimate: float, iterations: int):
        super().__init__(f"norm estimate did not converge after {iterations} iterations "
                         f"(last estimate {estimate:.12g})")
        self.estimate = estimate
        self.iterations = iterations


@dataclass(frozen=True)
class NormEstimate:
    value: float
    converged: bool
    iterations: int


def _power_run(T: LinearOperatorHandle, x: np.ndarray, tol: float, max_iters: int) -> NormEstimate:
    x = x / np.linalg.norm(x)
    prev = 0.0
    for it in range(1, max_iters + 1):
        y = T.apply(x)
        sigma = float(np.linalg.norm(y))
        if sigma == 0.0:
            return NormEstimate(0.0, True, it)
        if it > 1 and abs(sigma - prev) <= tol * sigma:
            return NormEstimate(sigma, True, it)
        prev = sigma
        z = T.adjoint(y)
        nz = np.linalg.norm(z)
        if nz == 0.0:
            return NormEstimate(sigma, True, it)
        x = z / nz
    return NormEstimate(prev, False, max_iters)


def estimate_norm(T: LinearOperatorHandle, tol: float = 1e-12, max_iters: int = 20000,
                  restarts: int = 5, seed: int = 0) -> NormEstimate:
    """Largest singular value by power iteration on ``T* T`` with seeded restarts."""
    rng = np.random.default_rng(seed)
    runs = []
    for _ in range(restarts):
        x0 = rng.standard_normal(T.shape) + 1j * rng.standard_normal(T.shape)
        runs.append(_power_run(T, x0, tol, max_iters))
    return NormEstimate(max(r.value for r in runs), all(r.converged for r in runs),
                        max(r.iterations for r in runs))


def _lanczos_norm(T: LinearOperatorHandle, tol: float, max_iters: int, seed: int) -> float:
    shape = T.shape
    gram = LinearOperator((T.size, T.size), dtype=complex,
                          matvec=lambda v: np.asarray(T.adjoint(T.apply(v.reshape(shape))),
                                                      dtype=complex).reshape(-1))
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(T.size) + 1j * rng.standard_normal(T.size)
    try:
        w = eigsh(gram, k=1, which="LA", tol=tol, maxiter=max_iters, v0=v0,
                  return_eigenvectors=False)
    except ArpackNoConvergence as exc:
        last = float(np.sqrt(max(np.max(exc.eigenvalues.real), 0.0))) if len(exc.eigenvalues) else float("nan")
        raise NoConvergence(last, max_iters) from None
    except ArpackError:
        # a Krylov space that collapses immediately (e.g. the zero operator)
        est = estimate_norm(T, tol=tol, max_iters=max_iters, restarts=1, seed=seed)
        if not est.converged:
            raise NoConvergence(est.value, est.iterations) from None
        return est.value
    return float(np.sqrt(max(w[0].real, 0.0)))


def operator_norm(T: LinearOperatorHandle, tol: float = 1e-12, max_iters: int = 20000,
                  restarts: int = 5, seed: int = 0, method: str = "auto") -> float:
    """Operator norm of ``T``.

    ``"power"`` iterates on ``T* T`` with ``restarts`` seeded starts and
    raises :class:`NoConvergence` when the relative change never drops
    below ``tol``.  ``"lanczos"`` runs ARPACK on ``T* T``; ``"dense"`` takes
    the SVD of the materialized matrix.  ``"auto"`` picks dense for tiny
    operators and Lanczos otherwise.
    """
    if method == "auto":
        method = "dense" if T.size <= 16 else "lanczos"
    if method == "dense":
        m = T.materialize()
        return float(np.linalg.svd(m, compute_uv=False)[0]) if m.size else 0.0
    if method == "lanczos":
        return _lanczos_norm(T, tol, max_iters, seed)
    if method != "power":
        raise ValueError(f"unknown method {method!r}")
    est = estimate_norm(T, tol=tol, max_iters=max_iters, restarts=restarts, seed=seed)
    if not est.converged:
        raise NoConvergence(est.value, est.iterations)
    return est.value
