"""Compressions onto q-dimensional subspaces: sampling the spatial range,
Stinespring realization of certified members, and the inductive construction
compressing a block-repetition model onto an exactly block-diagonal tuple.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .choi import kraus_decomposition, membership
from .core import (
    HermTuple,
    Isometry,
    as_complex_matrix,
    fold_seed,
    random_isometry,
    spectral_norm,
)
from .errors import CertificateError, DimensionMismatchError, TruncationTooSmallError


@dataclass
class CompressionSample:
    x: Isometry
    values: HermTuple


def compress(a, x):
    """The compressed tuple (X* A_1 X, ..., X* A_m X)."""
    xm = x.x if isinstance(x, Isometry) else as_complex_matrix(x)
    return HermTuple([xm.conj().T @ mat @ xm for mat in a.mats])


def sample_compressions(a, q, count, seed=0):
    """Random points of the spatial q-matricial range of ``a``."""
    if q > a.dim:
        raise DimensionMismatchError(f"q={q} exceeds tuple dimension {a.dim}")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        x = Isometry(random_isometry(a.dim, q, rng))
        out.append(CompressionSample(x=x, values=compress(a, x)))
    return out


def _kraus_tensor(ks):
    """(r, d, q) stack of Kraus pieces."""
    return np.stack([as_complex_matrix(k) for k in ks])


def _snap(v):
    u, _, vh = np.linalg.svd(v, full_matrices=False)
    return u @ vh


def kraus_isometry(ks):
    """Stack Kraus pieces into V with V[(k, i), :] = K_i[k, :] (input index outer).

    With this interleaving V*(T (x) I_r)V = sum_i K_i* T K_i.
    """
    t = _kraus_tensor(ks)
    r, d, q = t.shape
    return _snap(t.transpose(1, 0, 2).reshape(d * r, q))


def realize_member(b, body, phi, tol=1e-7):
    """Stinespring isometry V with V*(M_j (x) I_r)V = B_j from a Choi certificate.

    The certificate must be CP and unital within tolerance; r is its Kraus
    rank.  Since M_j (x) I_r is a permutation of r repeated body blocks, V
    embeds as a compression of any truncated model with at least r body
    blocks (see :func:`model_embedding`).
    """
    if phi.d_in != body.dim or phi.q_out != b.dim:
        raise DimensionMismatchError(
            f"certificate maps M_{phi.d_in} -> M_{phi.q_out}, "
            f"expected M_{body.dim} -> M_{b.dim}"
        )
    if b.m != body.m:
        raise DimensionMismatchError(f"tuple lengths differ: {b.m} vs {body.m}")
    defect = phi.unitality_defect()
    if defect > 1e-8:
        raise CertificateError(f"certificate unitality defect {defect:.3e} > 1e-8")
    ks = kraus_decomposition(phi)
    v = kraus_isometry(ks)
    r = len(ks)
    v3 = v.reshape(body.dim, r, b.dim)
    worst = 0.0
    for j in range(b.m):
        val = np.einsum("kra,kl,lrb->ab", v3.conj(), body.mats[j], v3)
        worst = max(worst, spectral_norm(val - b.mats[j]))
    if worst > tol:
        raise CertificateError(
            f"realization residual {worst:.3e} > {tol:.1e}; certificate too loose"
        )
    return Isometry(v)


def model_embedding(ks, model, start_block=0):
    """Embed a Kraus realization into the materialized model coordinates.

    The r pieces occupy body blocks start_block .. start_block + r - 1; the
    head is untouched.  Raises TruncationTooSmallError when the truncated
    model has too few blocks left.
    """
    t = _kraus_tensor(ks)
    r, d, q = t.shape
    if d != model.body_dim:
        raise DimensionMismatchError(
            f"Kraus pieces act on dimension {d}, body has {model.body_dim}"
        )
    if start_block + r > model.level:
        raise TruncationTooSmallError(
            start_block + r,
            f"need body blocks up to {start_block + r}, model has {model.level}",
        )
    carrier = _snap(t.reshape(r * d, q))
    w = np.zeros((model.dim, q), dtype=complex)
    lo = model.head_dim + start_block * d
    w[lo:lo + r * d, :] = carrier
    return Isometry(w)


def suggested_level(model, targets_count, p):
    """Generous truncation for hosting ``targets_count`` rank-p realizations."""
    return targets_count * (model.m + 1) * p * model.body_dim


def _unitary_extension(x):
    """Unitary whose leading columns are exactly the given orthonormal columns."""
    size, k = x.shape
    u_full = np.linalg.svd(x, full_matrices=True)[0]
    return np.hstack([x, u_full[:, k:]])


def _orth_basis(mat, tol=1e-12):
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    if not s.size or s[0] == 0.0:
        return u[:, :0]
    return u[:, s > tol * s[0]]


def _orth_complement(basis, size):
    if basis.shape[1] == 0:
        return np.eye(size, dtype=complex)
    u_full = np.linalg.svd(basis, full_matrices=True)[0]
    return u_full[:, basis.shape[1]:]


@dataclass
class BlockCompression:
    z: Isometry
    blocks: list
    off_diagonal_max: float
    body_blocks_used: int
    stages: list = field(default_factory=list)


def block_compress(model, targets, eps=1e-6, seed=0, member_kwargs=None):
    """Compress the materialized model onto an exactly block-diagonal tuple
    hitting every target up to ``eps``.

    Inductive construction: realize the next target inside the untouched tail,
    extend the accumulated isometry X1 to a unitary U, form the subspace L
    spanned by the domain of X1 and the pulled-back images U* A_j U of it
    (dimension at most k p (m+1)), and continue in the orthocomplement, where
    Y = U restricted to L-perp satisfies Y* X1 = 0 and Y* A_j X1 = 0.  Exact
    Stinespring realizations replace the epsilon-approximation inside each
    block, so eps only absorbs certificate round-off.
    """
    member_kwargs = dict(member_kwargs or {})
    body = model.body
    if not targets:
        raise DimensionMismatchError("need at least one target")
    p = targets[0].dim
    for i, t in enumerate(targets):
        if t.dim != p or t.m != body.m:
            raise DimensionMismatchError(f"target {i} has incompatible shape")

    realizations = []
    for i, t in enumerate(targets):
        verdict = membership(t, body, seed=fold_seed(seed, i), **member_kwargs)
        if not verdict.is_member:
            raise CertificateError(
                f"target {i} not certified inside the essential range "
                f"(status {verdict.status}, gap {verdict.gap:.2e})"
            )
        realizations.append(kraus_decomposition(verdict.certificate))
    needed = sum(len(ks) for ks in realizations)
    if needed > model.level:
        raise TruncationTooSmallError(
            needed, f"targets need {needed} body blocks, model has {model.level}"
        )

    a = model.materialized()
    size = a.dim
    z_cols = np.zeros((size, 0), dtype=complex)
    start = 0
    stages = []
    for ks in realizations:
        w = model_embedding(ks, model, start_block=start).x
        if z_cols.shape[1] == 0:
            new_cols = w
        else:
            u = _unitary_extension(z_cols)
            k1 = z_cols.shape[1]
            pulled = [u.conj().T @ (a.mats[j] @ z_cols) for j in range(body.m)]
            l_basis = _orth_basis(np.hstack([np.eye(size, k1, dtype=complex)] + pulled))
            y = u @ _orth_complement(l_basis, size)
            stage = {
                "y_x1": spectral_norm(y.conj().T @ z_cols),
                "y_a_x1": max(
                    spectral_norm(y.conj().T @ (a.mats[j] @ z_cols)) for j in range(body.m)
                ),
            }
            x2 = y.conj().T @ w
            stage["x2_defect"] = spectral_norm(x2.conj().T @ x2 - np.eye(p))
            stages.append(stage)
            new_cols = y @ x2
        z_cols = np.hstack([z_cols, new_cols])
        start += len(ks)

    z = Isometry(z_cols)
    blocks = []
    worst_dev = 0.0
    for i in range(len(targets)):
        cols = z_cols[:, i * p:(i + 1) * p]
        bi = compress(a, cols)
        blocks.append(bi)
        dev = max(spectral_norm(bi.mats[j] - targets[i].mats[j]) for j in range(body.m))
        worst_dev = max(worst_dev, dev)
    if worst_dev > eps:
        raise CertificateError(
            f"block deviation {worst_dev:.3e} exceeds eps={eps:.1e}; "
            "tighten the membership tolerances"
        )
    off_max = 0.0
    for j in range(body.m):
        full = z_cols.conj().T @ a.mats[j] @ z_cols
        for i in range(len(targets)):
            for i2 in range(len(targets)):
                if i != i2:
                    off = full[i * p:(i + 1) * p, i2 * p:(i2 + 1) * p]
                    off_max = max(off_max, spectral_norm(off))
    return BlockCompression(
        z=z,
        blocks=blocks,
        off_diagonal_max=off_max,
        body_blocks_used=needed,
        stages=stages,
    )
