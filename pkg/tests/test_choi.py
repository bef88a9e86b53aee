import numpy as np
import pytest

from matrange.choi import (
    ChoiMatrix,
    apply_choi,
    apply_choi_tuple,
    choi_identity,
    choi_of_isometry,
    choi_of_kraus,
    choi_of_map,
    choi_trace_map,
    cstar_combine,
    kraus_decomposition,
    membership,
    partial_trace_input,
    random_member,
    random_ucp_choi,
)
from matrange.core import (
    HermTuple,
    pencil_norm,
    random_hermitian,
    random_isometry,
    random_unitary,
    spectral_norm,
)
from matrange.errors import CertificateError, CompletenessError, DimensionMismatchError


def interval_member(b, a, tol=1e-9):
    """Independent oracle for a single-matrix tuple: B is in the q-matricial
    range of a single Hermitian A iff spec(B) lies in [min spec A, max spec A]."""
    wa = np.linalg.eigvalsh(a.mats[0])
    wb = np.linalg.eigvalsh(b.mats[0])
    return wa[0] - tol <= wb[0] and wb[-1] <= wa[-1] + tol


def test_choi_identity_applies_identically():
    rng = np.random.default_rng(0)
    phi = choi_identity(3)
    t = random_hermitian(3, rng)
    assert np.allclose(apply_choi(phi, t), t, atol=1e-12)
    assert phi.is_cp() and phi.is_unital()


def test_choi_compression_matches_direct():
    rng = np.random.default_rng(1)
    x = random_isometry(4, 2, rng)
    phi = choi_of_isometry(x)
    for _ in range(5):
        t = random_hermitian(4, rng)
        direct = x.conj().T @ t @ x
        assert spectral_norm(apply_choi(phi, t) - direct) <= 1e-10
    assert phi.is_cp() and phi.is_unital()


def test_choi_trace_map():
    phi = choi_trace_map(2, 3)
    out = apply_choi(phi, np.diag([2.0, 0.0]))
    assert np.allclose(out, np.eye(3), atol=1e-12)


def test_partial_trace_is_unitality():
    rng = np.random.default_rng(2)
    phi = random_ucp_choi(3, 2, rng)
    pt = partial_trace_input(phi.j, 3, 2)
    assert np.allclose(pt, np.eye(2), atol=1e-10)


def test_apply_choi_dim_mismatch():
    phi = choi_identity(2)
    with pytest.raises(DimensionMismatchError):
        apply_choi(phi, np.eye(3))


def test_kraus_identity_and_compression():
    ks = kraus_decomposition(choi_identity(3))
    assert len(ks) == 1
    assert np.allclose(np.abs(ks[0].conj().T @ ks[0]), np.eye(3), atol=1e-10)
    rng = np.random.default_rng(3)
    x = random_isometry(4, 2, rng)
    ks = kraus_decomposition(choi_of_isometry(x))
    assert len(ks) == 1
    # single Kraus piece equals X up to a global phase
    phase = ks[0][np.unravel_index(np.argmax(np.abs(x)), x.shape)] / x[np.unravel_index(np.argmax(np.abs(x)), x.shape)]
    assert np.allclose(ks[0], phase * x, atol=1e-8)


def test_kraus_reconstruction_random_ucp():
    rng = np.random.default_rng(4)
    phi = random_ucp_choi(3, 2, rng)
    ks = kraus_decomposition(phi)
    assert sum(1 for _ in ks) <= 6
    total = sum(k.conj().T @ k for k in ks)
    assert spectral_norm(total - np.eye(2)) <= 1e-8
    for _ in range(5):
        t = random_hermitian(3, rng)
        rebuilt = sum(k.conj().T @ t @ k for k in ks)
        assert spectral_norm(rebuilt - apply_choi(phi, t)) <= 1e-8


def test_kraus_rejects_non_psd():
    j = np.diag([1.0, -0.5, 1.0, 1.0])
    with pytest.raises(CertificateError):
        kraus_decomposition(ChoiMatrix(2, 2, j))


def test_membership_single_diagonal_member():
    a = HermTuple([np.diag([1.0, -1.0])])
    b = HermTuple([np.diag([0.5, -0.5])])
    assert interval_member(b, a)
    verdict = membership(b, a, seed=7)
    assert verdict.is_member
    cert = verdict.certificate
    assert spectral_norm(apply_choi(cert, a.mats[0]) - b.mats[0]) <= 1e-6
    assert cert.min_eigenvalue() >= -1e-8
    assert cert.unitality_defect() <= 1e-8


def test_membership_norm_violation_not_member():
    a = HermTuple([np.diag([1.0, -1.0])])
    b = HermTuple([1.5])
    assert not interval_member(b, a)
    verdict = membership(b, a, seed=7)
    assert verdict.is_not_member
    w = verdict.witness
    lhs = pencil_norm(w, b)
    rhs = pencil_norm(w, a)
    assert lhs > rhs + 1e-6
    assert verdict.gap == pytest.approx(lhs - rhs, abs=1e-12)


def test_membership_matches_interval_oracle():
    rng = np.random.default_rng(5)
    a = HermTuple([np.diag([2.0, 0.5, -1.0])])
    cases = [
        (HermTuple([np.diag([1.9, -0.9])]), True),
        (HermTuple([np.diag([2.5, 0.0])]), False),
        (HermTuple([random_hermitian(2, rng) * 0.4]), True),
        (HermTuple([np.diag([-1.4, 0.3])]), False),
    ]
    for b, expect in cases:
        assert interval_member(b, a) == expect
        verdict = membership(b, a, seed=11)
        if expect:
            assert verdict.is_member
        else:
            assert verdict.is_not_member


def test_membership_compression_is_member():
    rng = np.random.default_rng(6)
    a = HermTuple([random_hermitian(4, rng) for _ in range(2)])
    x = random_isometry(4, 2, rng)
    b = HermTuple([x.conj().T @ mat @ x for mat in a.mats])
    verdict = membership(b, a, seed=13)
    assert verdict.is_member


def test_membership_length_mismatch():
    a = HermTuple([np.eye(2)])
    b = HermTuple([np.eye(2), np.eye(2)])
    with pytest.raises(DimensionMismatchError):
        membership(b, a)


def test_member_certificate_invariants_random():
    rng = np.random.default_rng(7)
    a = HermTuple([random_hermitian(4, rng) for _ in range(2)])
    for i in range(3):
        b, _ = random_member(a, 2, rng)
        verdict = membership(b, a, seed=17 + i)
        assert verdict.is_member
        cert = verdict.certificate
        for j in range(a.m):
            assert spectral_norm(apply_choi(cert, a.mats[j]) - b.mats[j]) <= 1e-6
        assert cert.min_eigenvalue() >= -1e-8
        assert cert.unitality_defect() <= 1e-8


def test_membership_monotone_under_post_processing():
    rng = np.random.default_rng(8)
    a = HermTuple([random_hermitian(4, rng) for _ in range(2)])
    b, _ = random_member(a, 2, rng)
    assert membership(b, a, seed=19).is_member
    for i in range(3):
        post = random_ucp_choi(2, 2, rng)
        b2 = apply_choi_tuple(post, b)
        assert membership(b2, a, seed=23 + i).is_member


def test_membership_midpoint_of_members():
    rng = np.random.default_rng(9)
    a = HermTuple([random_hermitian(4, rng) for _ in range(2)])
    b1, _ = random_member(a, 2, rng)
    b2, _ = random_member(a, 2, rng)
    mid = cstar_combine([b1, b2], [np.eye(2) / np.sqrt(2), np.eye(2) / np.sqrt(2)])
    assert membership(mid, a, seed=29).is_member


def test_cstar_combine_unitary_case():
    rng = np.random.default_rng(10)
    b = HermTuple([random_hermitian(3, rng) for _ in range(2)])
    u = random_unitary(3, rng)
    out = cstar_combine([b], [u])
    for j in range(2):
        assert np.allclose(out.mats[j], u.conj().T @ b.mats[j] @ u, atol=1e-12)


def test_cstar_combine_convex_case():
    rng = np.random.default_rng(11)
    tuples = [HermTuple([random_hermitian(2, rng) for _ in range(2)]) for _ in range(3)]
    ts = np.array([0.2, 0.3, 0.5])
    ls = [np.sqrt(t) * np.eye(2) for t in ts]
    out = cstar_combine(tuples, ls)
    for j in range(2):
        expect = sum(t * tup.mats[j] for t, tup in zip(ts, tuples))
        assert np.allclose(out.mats[j], expect, atol=1e-12)


def test_cstar_combine_membership_recheck():
    rng = np.random.default_rng(12)
    a = HermTuple([random_hermitian(4, rng) for _ in range(2)])
    b1, _ = random_member(a, 2, rng)
    b2, _ = random_member(a, 2, rng)
    gs = [random_hermitian(2, rng) + 2 * np.eye(2) for _ in range(2)]
    s = sum(g.conj().T @ g for g in gs)
    w, u = np.linalg.eigh(s)
    s_inv_half = (u / np.sqrt(w)) @ u.conj().T
    ls = [g @ s_inv_half for g in gs]
    combined = cstar_combine([b1, b2], ls)
    verdict = membership(combined, a, seed=31)
    assert not verdict.is_not_member


def test_cstar_combine_completeness_violation():
    b = HermTuple([np.eye(2)])
    with pytest.raises(CompletenessError):
        cstar_combine([b, b], [np.eye(2), np.eye(2)])


def test_affine_projector_rows_match_direct_constraints():
    # the Frobenius-dual row construction must agree with evaluating the
    # constraint map directly on random Hermitian J
    from matrange.choi import _AffineProjector
    from matrange.core import herm_to_vec

    rng = np.random.default_rng(21)
    a = HermTuple([random_hermitian(3, rng) for _ in range(2)])
    b = HermTuple([random_hermitian(2, rng) for _ in range(2)])
    proj = _AffineProjector(a, b)
    for _ in range(5):
        j = random_hermitian(6, rng)
        phi = ChoiMatrix(3, 2, j)
        direct = np.concatenate(
            [herm_to_vec(partial_trace_input(j, 3, 2))]
            + [herm_to_vec(apply_choi(phi, a.mats[k])) for k in range(2)]
        )
        assert np.allclose(proj.c @ herm_to_vec(j), direct, atol=1e-10)


def test_choi_of_map_matches_builders():
    rng = np.random.default_rng(13)
    x = random_isometry(3, 2, rng)
    via_map = choi_of_map(lambda t: x.conj().T @ t @ x, 3, 2)
    via_kraus = choi_of_kraus([x])
    assert np.allclose(via_map.j, via_kraus.j, atol=1e-12)
