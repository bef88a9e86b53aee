"""Block-repetition models: a finite, computable stand-in for a self-adjoint
tuple modulo compact perturbations.

A model is a head tuple F (dimension h) direct-summed with an infinitely
repeated body tuple M (dimension d), truncated at ``level`` copies when
materialized.  Infinitely many identical body blocks survive every
finite-rank (head-supported) perturbation, so the essential pencil norm of
the model equals the single-block pencil norm; by the norm characterization
of membership this pins the essential matricial range to the body's range,
and membership, interior structure and perturbation questions all reduce to
computations on M.  This is the central modeling decision of the package: it
trades arbitrary essential structure (general weighted shifts, etc.) for
exact desk-scale computability.  The defining intersection over *all*
compact perturbations is closed by this identity analytically; numerically
the package verifies it over sampled finite-rank head perturbations only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .choi import membership
from .core import HermTuple, pencil_norm, random_hermitian
from .errors import DimensionMismatchError


@dataclass
class BlockRepetitionModel:
    """Head tuple F (+) level-fold repeated body tuple M."""

    head: HermTuple
    body: HermTuple
    level: int

    def __post_init__(self):
        if self.head.m != self.body.m:
            raise DimensionMismatchError(
                f"head has m={self.head.m}, body has m={self.body.m}"
            )
        if self.level < 1:
            raise DimensionMismatchError("truncation level must be >= 1")

    @property
    def m(self):
        return self.body.m

    @property
    def head_dim(self):
        return self.head.dim

    @property
    def body_dim(self):
        return self.body.dim

    @property
    def dim(self):
        return self.head_dim + self.level * self.body_dim

    def materialized(self):
        """The truncated operator tuple A_j = F_j (+) (I_level (x) M_j)."""
        h, d, n = self.head_dim, self.body_dim, self.level
        size = h + n * d
        mats = np.zeros((self.m, size, size), dtype=complex)
        mats[:, :h, :h] = self.head.mats
        for i in range(n):
            s = h + i * d
            mats[:, s:s + d, s:s + d] = self.body.mats
        return HermTuple(mats)

    def with_level(self, level):
        return BlockRepetitionModel(self.head, self.body, int(level))


def essential_pencil_norm(model, r):
    """Exact essential norm in the model class: the single-body pencil norm."""
    return pencil_norm(r, model.body)


def essential_membership(b, model, **kwargs):
    """Membership in the essential q-matricial range: delegate to the body."""
    return membership(b, model.body, **kwargs)


@dataclass
class IndependenceResult:
    independent: bool
    witness: np.ndarray | None


def interior_test(model, rel_tol=1e-10):
    """Linear independence of {I, M_1, ..., M_m} under the trace inner product.

    Independence is equivalent to the essential range having interior; when
    dependent, the returned coefficient vector (a_0, ..., a_m) satisfies
    ``a_0 I + sum_j a_j M_j = 0`` and every member tuple obeys the same affine
    relation.
    """
    body = model.body
    basis = [np.eye(body.dim, dtype=complex)] + list(body.mats)
    k = len(basis)
    gram = np.empty((k, k))
    for i in range(k):
        for j in range(k):
            gram[i, j] = float(np.real(np.trace(basis[i].conj().T @ basis[j])))
    w, u = np.linalg.eigh(gram)
    if w[0] > rel_tol * max(w[-1], 1e-300):
        return IndependenceResult(True, None)
    a = u[:, 0]
    lead = np.flatnonzero(np.abs(a) > 1e-12)
    if lead.size and a[lead[0]] < 0:
        a = -a
    return IndependenceResult(False, a / np.linalg.norm(a))


@dataclass
class PerturbationTuple:
    """Head-supported self-adjoint perturbation, with the model it applies to.

    ``model`` is the input model, head zero-padded when its dimension was not
    a multiple of the body dimension (padding adds strictly fewer than d
    dimensions, consistent with rank_bound <= h + d).
    """

    k: HermTuple
    rank_bound: int
    model: BlockRepetitionModel

    def perturbed(self):
        """The materialized tuple A + K (exactly block-periodic)."""
        return HermTuple(self.model.materialized().mats + self.k.mats)


def preserving_perturbation(model):
    """Head replacement K_j = (I_{h/d} (x) M_j) - F_j, zero elsewhere.

    After the perturbation the truncated operator is exactly I_{h/d + level}
    (x) M, so its q-matricial range coincides with the body's for *every* q —
    in the model class the preservation statement needs no bound on q.
    """
    body = model.body
    d = model.body_dim
    h = model.head_dim
    pad = (-h) % d
    if pad:
        padded_head = np.zeros((model.m, h + pad, h + pad), dtype=complex)
        padded_head[:, :h, :h] = model.head.mats
        model = BlockRepetitionModel(HermTuple(padded_head), body, model.level)
        h = h + pad
    s = h // d
    size = model.dim
    k_mats = np.zeros((model.m, size, size), dtype=complex)
    for j in range(model.m):
        target = np.kron(np.eye(s), body.mats[j])
        k_mats[j, :h, :h] = target - model.head.mats[j]
    return PerturbationTuple(k=HermTuple(k_mats), rank_bound=h, model=model)


def random_head_perturbation(model, rng, scale=1.0):
    """A sampled finite-rank self-adjoint perturbation supported on the head."""
    size = model.dim
    h = model.head_dim
    mats = np.zeros((model.m, size, size), dtype=complex)
    for j in range(model.m):
        mats[j, :h, :h] = random_hermitian(h, rng, scale=scale)
    return HermTuple(mats)


# ---------------------------------------------------------------------------
# support-function oracle (q = 1): used as an independent test oracle and for
# boundary polylines in reports, never inside the membership path


def support_directions(m, angle_count=720, seed=0):
    if m == 1:
        return np.array([[1.0], [-1.0]])
    if m == 2:
        thetas = np.linspace(0.0, 2.0 * np.pi, angle_count, endpoint=False)
        return np.stack([np.cos(thetas), np.sin(thetas)], axis=1)
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(angle_count, m))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    axes = np.concatenate([np.eye(m), -np.eye(m)])
    return np.concatenate([axes, dirs])


def support_values(body, directions):
    """h(u) = lambda_max(sum_j u_j M_j) for each direction row."""
    pencils = np.einsum("kj,jab->kab", np.asarray(directions, dtype=float), body.mats)
    return np.linalg.eigvalsh(pencils)[:, -1]


def support_margin(point, body, angle_count=720, seed=0):
    """max_u (u . b - h(u)): negative inside the joint range, positive outside."""
    point = np.asarray(point, dtype=float)
    if point.shape != (body.m,):
        raise DimensionMismatchError(f"point has shape {point.shape}, expected ({body.m},)")
    dirs = support_directions(body.m, angle_count=angle_count, seed=seed)
    return float((dirs @ point - support_values(body, dirs)).max())


def boundary_polyline(body, angle_count=720):
    """Boundary points of the joint numerical range W(M) for m = 2.

    One point per support direction, evaluated at the top eigenvector; the
    polyline is closed by repeating the first point.
    """
    if body.m != 2:
        raise DimensionMismatchError("boundary polyline requires an m=2 tuple")
    dirs = support_directions(2, angle_count=angle_count)
    pencils = np.einsum("kj,jab->kab", dirs, body.mats)
    _, vecs = np.linalg.eigh(pencils)
    top = vecs[:, :, -1]
    pts = np.stack(
        [np.real(np.einsum("ka,ab,kb->k", top.conj(), body.mats[j], top)) for j in range(2)],
        axis=1,
    )
    return np.concatenate([pts, pts[:1]], axis=0)
