"""Hermitian matrix tuples and the dense numerical primitives every other
module consumes.

Matrices are plain complex numpy arrays throughout; the classes here are thin
containers that enforce the structural invariants (Hermiticity, matching
dimensions, orthonormal columns) once at construction, so downstream code can
rely on them without re-checking.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatchError, SolverError

ISOMETRY_TOL = 1e-10

_SQRT2 = np.sqrt(2.0)


def as_complex_matrix(a):
    """Coerce a scalar, nested list or array to a 2-d complex ndarray."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1 and arr.size == 1:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise DimensionMismatchError(f"expected a matrix, got array of ndim {arr.ndim}")
    return arr


def hermitize(a):
    """Symmetrized copy (A + A*)/2, absorbing round-off in nominally Hermitian input."""
    arr = as_complex_matrix(a)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionMismatchError(f"Hermitian matrix must be square, got {arr.shape}")
    return (arr + arr.conj().T) / 2.0


class HermTuple:
    """An m-tuple of d x d complex Hermitian matrices, stored as an (m, d, d) stack.

    Every member is symmetrized on construction, so ``mats[j] == mats[j].conj().T``
    holds exactly afterwards.
    """

    __slots__ = ("mats",)

    def __init__(self, mats):
        if isinstance(mats, np.ndarray) and mats.ndim == 3:
            members = list(mats)
        elif isinstance(mats, (list, tuple)):
            members = list(mats)
        else:
            raise DimensionMismatchError(
                "HermTuple expects a list of matrices or an (m, d, d) array"
            )
        if not members:
            raise DimensionMismatchError("HermTuple needs at least one member")
        herm = [hermitize(x) for x in members]
        dim = herm[0].shape[0]
        for i, h in enumerate(herm):
            if h.shape[0] != dim:
                raise DimensionMismatchError(
                    f"member {i} has dimension {h.shape[0]}, expected {dim}"
                )
        self.mats = np.stack(herm)

    @property
    def m(self):
        return self.mats.shape[0]

    @property
    def dim(self):
        return self.mats.shape[1]

    def __len__(self):
        return self.m

    def __getitem__(self, j):
        return self.mats[j]

    def __iter__(self):
        return iter(self.mats)

    def __repr__(self):
        return f"HermTuple(m={self.m}, dim={self.dim})"


class NormTestTuple:
    """Coefficients (R_0, ..., R_m) of a pencil R0 (x) I + sum_j Rj (x) T_j.

    The matrices are arbitrary complex q x q; nothing is symmetrized.
    """

    __slots__ = ("mats",)

    def __init__(self, mats):
        if isinstance(mats, np.ndarray) and mats.ndim == 3:
            members = list(mats)
        elif isinstance(mats, (list, tuple)):
            members = list(mats)
        else:
            raise DimensionMismatchError(
                "NormTestTuple expects a list of matrices or an (m+1, q, q) array"
            )
        if not members:
            raise DimensionMismatchError("NormTestTuple needs at least R0")
        mats2 = [as_complex_matrix(x) for x in members]
        q = mats2[0].shape[0]
        for i, r in enumerate(mats2):
            if r.shape != (q, q):
                raise DimensionMismatchError(
                    f"coefficient {i} has shape {r.shape}, expected ({q}, {q})"
                )
        self.mats = np.stack(mats2)

    @property
    def q(self):
        return self.mats.shape[1]

    @property
    def m(self):
        return self.mats.shape[0] - 1

    def __len__(self):
        return self.mats.shape[0]

    def __getitem__(self, j):
        return self.mats[j]

    def __repr__(self):
        return f"NormTestTuple(m={self.m}, q={self.q})"


class Isometry:
    """A rows x cols matrix X with orthonormal columns (||X*X - I|| <= 1e-10)."""

    __slots__ = ("x",)

    def __init__(self, x):
        arr = as_complex_matrix(x)
        rows, cols = arr.shape
        if cols > rows:
            raise DimensionMismatchError(
                f"isometry needs cols <= rows, got {rows} x {cols}"
            )
        defect = spectral_norm(arr.conj().T @ arr - np.eye(cols))
        if defect > ISOMETRY_TOL:
            raise DimensionMismatchError(
                f"columns are not orthonormal: ||X*X - I|| = {defect:.3e}"
            )
        self.x = arr

    @classmethod
    def orthonormalized(cls, x):
        """Snap to the nearest isometry (polar factor) before validating."""
        arr = as_complex_matrix(x)
        u, _, vh = np.linalg.svd(arr, full_matrices=False)
        return cls(u @ vh)

    @property
    def rows(self):
        return self.x.shape[0]

    @property
    def cols(self):
        return self.x.shape[1]

    def __repr__(self):
        return f"Isometry({self.rows} x {self.cols})"


def kron(a, b):
    """Kronecker product; scalars act as 1 x 1 factors."""
    return np.kron(as_complex_matrix(a), as_complex_matrix(b))


def spectral_norm(a):
    """Largest singular value."""
    arr = as_complex_matrix(a)
    if not arr.size:
        return 0.0
    return float(np.linalg.svd(arr, compute_uv=False)[0])


def herm_eig(a):
    """Eigen-decomposition A = U diag(w) U* of a Hermitian matrix.

    Returns eigenvalues ascending and the unitary of eigenvectors.  Input is
    symmetrized first, consistent with the construction contract.
    """
    h = hermitize(a)
    try:
        w, u = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise SolverError(f"eigensolver failed to converge: {exc}") from exc
    return w, u


def psd_project(a):
    """Nearest positive semidefinite matrix in Frobenius norm (clip negative eigenvalues)."""
    w, u = herm_eig(a)
    if w[0] >= 0.0:
        return hermitize(a)
    return hermitize((u * np.clip(w, 0.0, None)) @ u.conj().T)


def _check_pencil_pair(r, t):
    if r.m != t.m:
        raise DimensionMismatchError(
            f"coefficient tuple has m={r.m} but matrix tuple has m={t.m}"
        )


def pencil_matrix(r, t):
    """The operator R0 (x) I_d + sum_j Rj (x) T_j."""
    _check_pencil_pair(r, t)
    out = np.kron(r.mats[0], np.eye(t.dim))
    for j in range(t.m):
        out = out + np.kron(r.mats[j + 1], t.mats[j])
    return out


def pencil_norm(r, t):
    """Spectral norm of the pencil R0 (x) I + sum_j Rj (x) T_j."""
    return spectral_norm(pencil_matrix(r, t))


def pencil_norms(rs, mats):
    """Vectorized pencil norms for a stack of coefficient tuples.

    rs: (N, m+1, q, q) complex; mats: (m, d, d) Hermitian stack.  Returns (N,).
    """
    rs = np.asarray(rs, dtype=complex)
    mats = np.asarray(mats, dtype=complex)
    n, m1, q, _ = rs.shape
    d = mats.shape[-1]
    acc = np.einsum("nab,cd->nacbd", rs[:, 0], np.eye(d, dtype=complex))
    for j in range(1, m1):
        acc += np.einsum("nab,cd->nacbd", rs[:, j], mats[j - 1])
    flat = acc.reshape(n, q * d, q * d)
    return np.linalg.svd(flat, compute_uv=False)[:, 0]


_triu_cache = {}


def _triu(n):
    got = _triu_cache.get(n)
    if got is None:
        got = np.triu_indices(n, 1)
        _triu_cache[n] = got
    return got


def herm_to_vec(h):
    """Isometric real parametrization of Hermitian matrices.

    Maps Frobenius inner product to the Euclidean one, so orthogonal
    projections commute with the encoding.
    """
    h = np.asarray(h, dtype=complex)
    n = h.shape[0]
    iu = _triu(n)
    upper = h[iu]
    return np.concatenate(
        [h.diagonal().real, _SQRT2 * upper.real, _SQRT2 * upper.imag]
    )


def vec_to_herm(v, n):
    """Inverse of :func:`herm_to_vec`."""
    v = np.asarray(v, dtype=float)
    iu = _triu(n)
    k = n + iu[0].size
    out = np.zeros((n, n), dtype=complex)
    out[iu] = (v[n:k] + 1j * v[k:]) / _SQRT2
    out = out + out.conj().T
    out[np.diag_indices(n)] = v[:n]
    return out


def random_hermitian(dim, rng, scale=1.0):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return hermitize(g) * scale


def random_isometry(rows, cols, rng):
    """Haar-ish isometry from a QR factorization with a canonical phase fix."""
    if cols > rows:
        raise DimensionMismatchError(f"isometry needs cols <= rows, got {rows} x {cols}")
    g = rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    phase = d / np.abs(d)
    return q * phase.conj()


def random_unitary(dim, rng):
    return random_isometry(dim, dim, rng)


def fold_seed(seed, *tags):
    """Derive a deterministic child seed from a root seed and integer tags."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFF] + [int(t) & 0xFFFFFFFF for t in tags])
    return int(ss.generate_state(1)[0])
