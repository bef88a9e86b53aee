"""Choi representations of unital completely positive maps and the
convex-feasibility membership oracle for joint q-matricial ranges.

Block convention (fixed package-wide): for a linear map Phi : M_d -> M_q the
Choi matrix J is (d*q) x (d*q) with the input index outermost — block (k, l)
of size q x q equals Phi(E_kl).  Complete positivity of Phi is positive
semidefiniteness of J; the sum of the diagonal blocks (partial trace over the
input index) equals Phi(I_d), so unitality reads sum_k J_kk = I_q.
"""

from __future__ import annotations

import numpy as np

from .core import (
    HermTuple,
    as_complex_matrix,
    fold_seed,
    herm_to_vec,
    hermitize,
    pencil_norm,
    random_isometry,
    spectral_norm,
    vec_to_herm,
)
from .errors import CertificateError, CompletenessError, DimensionMismatchError
from .witness import reference_for, search_witness

MEMBER = "member"
NOT_MEMBER = "not_member"
INCONCLUSIVE = "inconclusive"

GAP_TOL = 1e-6
MEMBER_TOL = 1e-7
MAX_ITER = 5000
WITNESS_BUDGET = 20000


class ChoiMatrix:
    """Choi matrix of a linear map M_{d_in} -> M_{q_out}."""

    __slots__ = ("d_in", "q_out", "j")

    def __init__(self, d_in, q_out, j):
        d_in, q_out = int(d_in), int(q_out)
        j = hermitize(j)
        if j.shape[0] != d_in * q_out:
            raise DimensionMismatchError(
                f"Choi matrix must have size {d_in * q_out}, got {j.shape[0]}"
            )
        self.d_in = d_in
        self.q_out = q_out
        self.j = j

    def blocks(self):
        """(d, q, d, q) view with block (k, l) = Phi(E_kl)."""
        return self.j.reshape(self.d_in, self.q_out, self.d_in, self.q_out)

    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(self.j)[0])

    def unitality_defect(self):
        pt = partial_trace_input(self.j, self.d_in, self.q_out)
        return spectral_norm(pt - np.eye(self.q_out))

    def is_cp(self, tol=1e-9):
        return self.min_eigenvalue() >= -tol

    def is_unital(self, tol=1e-8):
        return self.unitality_defect() <= tol

    def __repr__(self):
        return f"ChoiMatrix(d_in={self.d_in}, q_out={self.q_out})"


def partial_trace_input(j, d, q):
    """Sum of the q x q diagonal blocks of a (d*q) x (d*q) Choi matrix."""
    return np.einsum("kakb->ab", np.asarray(j).reshape(d, q, d, q))


def apply_choi(phi, t):
    """Evaluate Phi(T) = sum_{k,l} T_kl * block_kl(J)."""
    t = as_complex_matrix(t)
    if t.shape != (phi.d_in, phi.d_in):
        raise DimensionMismatchError(
            f"argument has shape {t.shape}, map expects {phi.d_in} x {phi.d_in}"
        )
    return np.einsum("kl,kalb->ab", t, phi.blocks())


def apply_choi_tuple(phi, t):
    """Componentwise image of a Hermitian tuple under the map."""
    return HermTuple([apply_choi(phi, mat) for mat in t.mats])


def choi_of_map(fn, d_in, q_out):
    """Choi matrix of an arbitrary linear map given as a callable on matrices."""
    q = int(q_out)
    j = np.zeros((d_in * q, d_in * q), dtype=complex)
    for k in range(d_in):
        for l in range(d_in):
            e = np.zeros((d_in, d_in), dtype=complex)
            e[k, l] = 1.0
            j[k * q:(k + 1) * q, l * q:(l + 1) * q] = as_complex_matrix(fn(e))
    return ChoiMatrix(d_in, q, j)


def choi_of_kraus(ks):
    """Choi matrix of T -> sum_i K_i* T K_i for d x q Kraus pieces."""
    mats = [as_complex_matrix(k) for k in ks]
    d, q = mats[0].shape
    for i, k in enumerate(mats):
        if k.shape != (d, q):
            raise DimensionMismatchError(f"Kraus piece {i} has shape {k.shape}")
    vs = np.stack([k.conj().reshape(-1) for k in mats])
    j = np.einsum("ia,ib->ab", vs, vs.conj())
    return ChoiMatrix(d, q, j)


def choi_identity(d):
    return choi_of_kraus([np.eye(d)])


def choi_of_isometry(x):
    """Choi matrix of the compression T -> X* T X."""
    arr = x.x if hasattr(x, "x") else as_complex_matrix(x)
    return choi_of_kraus([arr])


def choi_trace_map(d, q):
    """Choi matrix of T -> (tr T / d) I_q."""
    return ChoiMatrix(d, q, np.eye(d * q) / d)


def random_ucp_choi(d, q, rng, kraus_count=None, mix=0.0):
    """A random unital CP map sampled through a Haar-ish Kraus isometry.

    ``mix`` blends toward the trace map, pulling images into the interior.
    """
    r = int(kraus_count) if kraus_count else max(int(d), -(-q // d))
    v = random_isometry(r * d, q, rng)
    phi = choi_of_kraus([v[i * d:(i + 1) * d] for i in range(r)])
    if mix:
        phi = ChoiMatrix(d, q, (1.0 - mix) * phi.j + mix * choi_trace_map(d, q).j)
    return phi


def random_member(a, q, rng, mix=0.1, kraus_count=None):
    """Sample a tuple in the q-matricial range of ``a`` plus its certificate."""
    phi = random_ucp_choi(a.dim, q, rng, kraus_count=kraus_count, mix=mix)
    return apply_choi_tuple(phi, a), phi


def kraus_decomposition(phi, cutoff=1e-10, psd_tol=1e-8):
    """Kraus pieces from the eigendecomposition of the Choi matrix.

    Eigenvalues below ``cutoff`` are dropped; eigenvalues below ``-psd_tol``
    mean the map is not CP and raise.
    """
    w, u = np.linalg.eigh(phi.j)
    if w[0] < -psd_tol:
        raise CertificateError(
            f"Choi matrix is not PSD within tolerance: min eigenvalue {w[0]:.3e}"
        )
    ks = []
    for i in range(w.size):
        if w[i] > cutoff:
            ks.append(np.sqrt(w[i]) * u[:, i].conj().reshape(phi.d_in, phi.q_out))
    if not ks:
        raise CertificateError("Choi matrix has no eigenvalue above the cutoff")
    return ks


def cstar_combine(tuples, ls, tol=1e-8):
    """Operator convex combination sum_j L_j* B^(j) L_j of Hermitian tuples.

    Requires sum_j L_j* L_j = I within ``tol``.
    """
    if not tuples or len(tuples) != len(ls):
        raise DimensionMismatchError("need one coefficient L per tuple")
    ls = [as_complex_matrix(l) for l in ls]
    q = tuples[0].dim
    m = tuples[0].m
    for i, t in enumerate(tuples):
        if t.dim != q or t.m != m:
            raise DimensionMismatchError(f"tuple {i} has incompatible shape")
    for i, l in enumerate(ls):
        if l.shape != (q, q):
            raise DimensionMismatchError(f"coefficient {i} has shape {l.shape}")
    total = sum(l.conj().T @ l for l in ls)
    dev = spectral_norm(total - np.eye(q))
    if dev > tol:
        raise CompletenessError(f"sum L*L deviates from identity by {dev:.3e}")
    comps = []
    for i in range(m):
        comps.append(sum(ls[j].conj().T @ tuples[j].mats[i] @ ls[j] for j in range(len(ls))))
    return HermTuple(comps)


class MembershipVerdict:
    """Outcome of the membership oracle.

    ``member`` carries a Choi certificate reproducing B; ``not_member`` carries
    a re-verifiable norm witness; ``inconclusive`` carries the residual gap.
    """

    __slots__ = ("status", "gap", "certificate", "witness")

    def __init__(self, status, gap, certificate=None, witness=None):
        self.status = status
        self.gap = float(gap)
        self.certificate = certificate
        self.witness = witness

    @property
    def is_member(self):
        return self.status == MEMBER

    @property
    def is_not_member(self):
        return self.status == NOT_MEMBER

    @property
    def is_inconclusive(self):
        return self.status == INCONCLUSIVE

    def __repr__(self):
        return f"MembershipVerdict({self.status}, gap={self.gap:.3e})"


class _AffineProjector:
    """Orthogonal projector onto the affine set of Hermitian J with
    sum_k J_kk = I_q and Phi_J(A_j) = B_j for all j.

    Works in the isometric real parametrization, so the least-squares
    correction is an exact Frobenius projection.  If the linear system is
    inconsistent the projector targets the nearest feasible right-hand side;
    ``consistency_defect`` reports that distance.
    """

    def __init__(self, a, b):
        d, q = a.dim, b.dim
        target = [herm_to_vec(np.eye(q))]
        for j in range(a.m):
            target.append(herm_to_vec(b.mats[j]))
        self.target = np.concatenate(target)
        # row for output component <H_t, .> of the constraint on A_j is the
        # Frobenius dual kron(conj(A_j), H_t) (identity for the unital block)
        duals = [np.eye(d, dtype=complex)] + [a.mats[j].conj() for j in range(a.m)]
        out_basis = np.eye(q * q)
        rows = []
        for g in duals:
            for t in range(q * q):
                h = vec_to_herm(out_basis[t], q)
                rows.append(herm_to_vec(np.kron(g, h)))
        c = np.stack(rows)
        self.c = c
        u, s, vt = np.linalg.svd(c, full_matrices=False)
        keep = s > (s[0] * 1e-12 if s.size and s[0] > 0 else np.inf)
        self._u = u[:, keep]
        self._sinv = 1.0 / s[keep]
        self._vt = vt[keep]
        feas = self._pinv(self.target)
        self.consistency_defect = float(np.linalg.norm(c @ feas - self.target))

    def _pinv(self, y):
        return self._vt.T @ (self._sinv * (self._u.T @ y))

    def project(self, x):
        return x - self._pinv(self.c @ x - self.target)

    def defect_at(self, x):
        return float(np.linalg.norm(self.c @ x - self.target))


def _psd_step(v, n):
    h = vec_to_herm(v, n)
    w, u = np.linalg.eigh(h)
    if w[0] >= 0.0:
        return v.copy(), float(w[0])
    proj = (u * np.clip(w, 0.0, None)) @ u.conj().T
    return herm_to_vec(proj), float(w[0])


def _polish_certificate(x, proj, n, iters, target=-1e-10):
    """Extra alternating projections driving the affine iterate toward PSD.

    Needed so Kraus decompositions of the certificate (which clip at 1e-10)
    reproduce B well inside the realization tolerance.
    """
    best, best_lam = x, float(np.linalg.eigvalsh(vec_to_herm(x, n))[0])
    cur = x
    for _ in range(iters):
        if best_lam >= target:
            break
        y, _ = _psd_step(cur, n)
        cur = proj.project(y)
        lam = float(np.linalg.eigvalsh(vec_to_herm(cur, n))[0])
        if lam > best_lam:
            best, best_lam = cur, lam
    y, _ = _psd_step(best, n)
    gap = float(np.linalg.norm(y - best))
    return best, best_lam, gap


def _witness_gap(w, b, ref):
    return float(pencil_norm(w, b) - reference_for(ref).norm(w))


def membership(b, a, max_iter=MAX_ITER, gap_tol=GAP_TOL, member_tol=MEMBER_TOL,
               witness_budget=WITNESS_BUDGET, seed=0, screen=True, polish_iter=400):
    """Decide whether ``b`` lies in the joint q-matricial range of ``a``.

    Dykstra's alternating projections run between the PSD cone and the affine
    set encoding unitality and the image constraints Phi(A_j) = B_j.  A
    converged intersection point becomes a Choi certificate; a persistent gap
    triggers the norm-witness search, whose hits soundly refute membership.
    Boundary points may legitimately come back inconclusive.
    """
    if b.m != a.m:
        raise DimensionMismatchError(f"tuple lengths differ: B has {b.m}, A has {a.m}")
    d, q = a.dim, b.dim
    n = d * q
    screen_seed = fold_seed(seed, 101)
    final_seed = fold_seed(seed, 202)

    if screen:
        w = search_witness(b, a, budget=min(witness_budget, 700), restarts=4,
                           direction_count=48, seed=screen_seed, gap_tol=gap_tol,
                           early_gap=max(100 * gap_tol, 1e-3))
        if w is not None:
            return MembershipVerdict(NOT_MEMBER, gap=_witness_gap(w, b, a), witness=w)

    proj = _AffineProjector(a, b)
    if proj.consistency_defect > member_tol:
        w = search_witness(b, a, budget=witness_budget, seed=final_seed, gap_tol=gap_tol)
        if w is not None:
            return MembershipVerdict(NOT_MEMBER, gap=_witness_gap(w, b, a), witness=w)
        return MembershipVerdict(INCONCLUSIVE, gap=proj.consistency_defect)

    x = proj.project(herm_to_vec(np.eye(n) / d))
    p = np.zeros_like(x)
    qc = np.zeros_like(x)
    gap = np.inf
    best_gap = np.inf
    window_best = np.inf
    stall_window = 300
    for it in range(1, max_iter + 1):
        y, _ = _psd_step(x + p, n)
        p = x + p - y
        x_new = proj.project(y + qc)
        qc = y + qc - x_new
        x = x_new
        gap = float(np.linalg.norm(y - x))
        best_gap = min(best_gap, gap)
        if it % 10 == 0 and gap <= member_tol:
            lam = float(np.linalg.eigvalsh(vec_to_herm(x, n))[0])
            if lam >= -1e-8:
                cert_vec, _, cert_gap = _polish_certificate(x, proj, n, polish_iter)
                cert = ChoiMatrix(d, q, vec_to_herm(cert_vec, n))
                return MembershipVerdict(MEMBER, gap=cert_gap, certificate=cert)
        if it % stall_window == 0:
            if best_gap > 10 * gap_tol and window_best - best_gap < 1e-4 * best_gap:
                break
            window_best = best_gap

    w = search_witness(b, a, budget=witness_budget, seed=final_seed, gap_tol=gap_tol)
    if w is not None:
        return MembershipVerdict(NOT_MEMBER, gap=_witness_gap(w, b, a), witness=w)
    return MembershipVerdict(INCONCLUSIVE, gap=gap)
