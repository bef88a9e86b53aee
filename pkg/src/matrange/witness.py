"""Direct evaluation and heuristic falsification of the pencil-norm
membership inequality, plus the vertex norm formula for simplices.

The inequality under test: for every coefficient tuple R,

    ||R0 (x) I_q + sum_j Rj (x) B_j||  <=  reference_norm(R),

where the reference is the same pencil over a finite tuple A, over a
block-repetition body, or the vertex maximum over a simplex.  The search is
incomplete by design (the quantifier runs over all of M_q^{m+1}); what matters
is soundness, so every hit is re-validated from scratch before being returned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    HermTuple,
    NormTestTuple,
    pencil_norm,
    pencil_norms,
)
from .errors import DimensionMismatchError

INEQ_TOL = 1e-9


@dataclass
class InequalityResult:
    lhs: float
    rhs: float
    holds: bool


class PencilReference:
    """Right-hand-side evaluator for the membership inequality."""

    def __init__(self, norm_fn, norms_fn=None):
        self._norm = norm_fn
        self._norms = norms_fn

    def norm(self, r):
        return float(self._norm(r))

    def norms(self, stack):
        if self._norms is not None:
            return np.asarray(self._norms(stack), dtype=float)
        return np.array([self._norm(NormTestTuple(s)) for s in stack], dtype=float)


def reference_for(obj):
    """Adapt a tuple / model / simplex / callable into a PencilReference."""
    if isinstance(obj, PencilReference):
        return obj
    if isinstance(obj, HermTuple):
        return PencilReference(
            lambda r: pencil_norm(r, obj),
            lambda stack: pencil_norms(stack, obj.mats),
        )
    body = getattr(obj, "body", None)
    if isinstance(body, HermTuple):
        return reference_for(body)
    verts = getattr(obj, "vertices", None)
    if verts is not None:
        v = np.asarray(verts, dtype=float)
        return PencilReference(
            lambda r: float(vertex_pencil_norms(r.mats[None], v)[0]),
            lambda stack: vertex_pencil_norms(stack, v),
        )
    if callable(obj):
        return PencilReference(obj)
    raise TypeError(f"cannot build a pencil reference from {type(obj)!r}")


def vertex_pencil_norms(rs, vertices):
    """max_k ||R0 + sum_j v_jk Rj|| for a stack of coefficient tuples."""
    rs = np.asarray(rs, dtype=complex)
    v = np.asarray(vertices, dtype=float)
    combos = rs[:, None, 0] + np.einsum("kj,njab->nkab", v, rs[:, 1:])
    return np.linalg.svd(combos, compute_uv=False)[..., 0].max(axis=1)


def vertex_pencil_norm(r, simplex):
    """Vertex norm formula: max over simplex vertices of the substituted pencil."""
    verts = np.asarray(getattr(simplex, "vertices", simplex), dtype=float)
    if verts.shape[0] != r.m + 1:
        raise DimensionMismatchError(
            f"simplex has {verts.shape[0]} vertices, coefficients expect {r.m + 1}"
        )
    return float(vertex_pencil_norms(r.mats[None], verts)[0])


def check_inequality(r, b, ref_norm_fn, tol=INEQ_TOL):
    """Evaluate both sides of the membership inequality for one coefficient tuple."""
    if b.dim != r.q:
        raise DimensionMismatchError(
            f"tuple dimension {b.dim} does not match coefficient size {r.q}"
        )
    if b.m != r.m:
        raise DimensionMismatchError(f"tuple lengths differ: {b.m} vs {r.m}")
    lhs = pencil_norm(r, b)
    rhs = reference_for(ref_norm_fn).norm(r)
    return InequalityResult(lhs=float(lhs), rhs=float(rhs), holds=bool(lhs <= rhs + tol))


def _max_coeff_norms(stack):
    n, m1, q, _ = stack.shape
    s = np.linalg.svd(stack.reshape(n * m1, q, q), compute_uv=False)[:, 0]
    return s.reshape(n, m1).max(axis=1)


def search_witness(b, ref, budget=20000, restarts=50, seed=0, gap_tol=1e-6,
                   direction_count=64, early_gap=None):
    """Hunt for a coefficient tuple violating the membership inequality for ``b``.

    Candidate pool: the m+1 axis pencils, scalar-direction pencils
    (c I, u_1 I, ..., u_m I), and Gaussian restarts; the survivors get a
    lockstep per-entry hill climb with halving steps.  Candidates are kept at
    max_j ||R_j|| = 1 (the violation is positively homogeneous, so this fixes
    the reported gap's scale).  Deterministic for fixed seed and budget;
    returns None when nothing exceeds ``gap_tol``.
    """
    ref = reference_for(ref)
    q, m = b.dim, b.m
    rng = np.random.default_rng(seed)
    used = 0
    best_gap = -np.inf
    best_r = None

    def evaluate(stack):
        nonlocal used
        used += stack.shape[0]
        return pencil_norms(stack, b.mats) - ref.norms(stack)

    def consider(stack, gaps):
        nonlocal best_gap, best_r
        s = _max_coeff_norms(stack)
        s = np.where(s > 0, s, 1.0)
        g = gaps / s
        i = int(np.argmax(g))
        if g[i] > best_gap:
            best_gap = float(g[i])
            best_r = stack[i] / s[i]

    def finalize():
        if best_r is None or best_gap <= gap_tol:
            return None
        w = NormTestTuple(best_r)
        # re-validate from scratch: soundness over everything else
        gap = pencil_norm(w, b) - ref.norm(w)
        if gap > gap_tol:
            return w
        return None

    eye = np.eye(q, dtype=complex)
    cand = []
    for j in range(m + 1):
        c0 = np.zeros((m + 1, q, q), dtype=complex)
        c0[j] = eye
        cand.append(c0)
    us = rng.normal(size=(direction_count, m))
    us /= np.maximum(np.linalg.norm(us, axis=1, keepdims=True), 1e-12)
    for shift in (0.0, 1.0, 4.0):
        for u in us:
            c0 = np.zeros((m + 1, q, q), dtype=complex)
            c0[0] = shift * eye
            for j in range(m):
                c0[j + 1] = u[j] * eye
            cand.append(c0)
    gauss = (rng.normal(size=(restarts, m + 1, q, q))
             + 1j * rng.normal(size=(restarts, m + 1, q, q))) / np.sqrt(2.0)
    cand = np.concatenate([np.stack(cand), gauss])[: max(1, budget)]
    gaps = evaluate(cand)
    consider(cand, gaps)
    if early_gap is not None and best_gap >= early_gap:
        return finalize()

    # lockstep polish of the best normalized candidates: per sweep, probe
    # every entry of every member at +/- delta in one batch and apply the best
    # single-entry move per member; halve the step when nothing improves
    k = min(restarts, cand.shape[0])
    scale = _max_coeff_norms(cand)
    scale = np.where(scale > 0, scale, 1.0)
    order = np.argsort(-(gaps / scale))[:k]
    pop = np.ascontiguousarray(cand[order] / scale[order, None, None, None])
    cur = (gaps / scale)[order].copy()
    flat = pop.view(np.float64).reshape(k, -1)
    ncoord = flat.shape[1]
    delta = 0.6
    sweep_cost = 2 * ncoord * k
    while used + sweep_cost <= budget and delta >= 1e-4:
        probes = np.repeat(pop[None], 2 * ncoord, axis=0)
        pflat = probes.view(np.float64).reshape(2 * ncoord, k, ncoord)
        for ci in range(ncoord):
            pflat[2 * ci, :, ci] += delta
            pflat[2 * ci + 1, :, ci] -= delta
        gaps_sweep = evaluate(probes.reshape(-1, m + 1, q, q)).reshape(2 * ncoord, k)
        best_idx = gaps_sweep.argmax(axis=0)
        best_val = gaps_sweep.max(axis=0)
        moved = best_val > cur
        if np.any(moved):
            rows = np.flatnonzero(moved)
            cols = best_idx[rows] // 2
            signs = np.where(best_idx[rows] % 2 == 0, delta, -delta)
            flat[rows, cols] += signs
            cur[rows] = best_val[rows]
            s = _max_coeff_norms(pop)
            s = np.where(s > 0, s, 1.0)
            pop /= s[:, None, None, None]
            cur = cur / s
            i = int(np.argmax(cur))
            if cur[i] > best_gap:
                best_gap = float(cur[i])
                best_r = pop[i].copy()
            if early_gap is not None and best_gap >= early_gap:
                break
        else:
            delta *= 0.5
    return finalize()
