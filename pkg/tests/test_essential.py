import numpy as np
import pytest

from matrange.choi import membership, random_member
from matrange.core import HermTuple, NormTestTuple, pencil_norm, random_hermitian
from matrange.essential import (
    BlockRepetitionModel,
    boundary_polyline,
    essential_membership,
    essential_pencil_norm,
    interior_test,
    preserving_perturbation,
    random_head_perturbation,
    support_margin,
    support_values,
)
from matrange.witness import check_inequality


def segment_model():
    # W(M) is the segment from (0, 1) to (1, 0)
    body = HermTuple([np.diag([0.0, 1.0]), np.diag([1.0, 0.0])])
    head = HermTuple([np.eye(1) * 0.3, np.eye(1) * -0.2])
    return BlockRepetitionModel(head, body, 3)


def brute_support_margin(point, body, count=1440):
    """Independent support-function check on its own dense angle grid."""
    thetas = np.linspace(0, 2 * np.pi, count, endpoint=False)
    worst = -np.inf
    for t in thetas:
        u = np.array([np.cos(t), np.sin(t)])
        h = np.linalg.eigvalsh(u[0] * body.mats[0] + u[1] * body.mats[1])[-1]
        worst = max(worst, float(u @ point - h))
    return worst


def test_materialized_block_structure():
    model = segment_model()
    a = model.materialized()
    assert a.dim == 1 + 3 * 2
    assert np.allclose(a.mats[0][:1, :1], model.head.mats[0])
    assert np.allclose(a.mats[0][1:3, 1:3], model.body.mats[0])
    assert np.allclose(a.mats[0][3:5, 3:5], model.body.mats[0])
    # off-diagonal couplings vanish
    assert np.count_nonzero(a.mats[0][1:3, 3:5]) == 0


def test_essential_pencil_norm_examples():
    model = segment_model()
    r = NormTestTuple([np.eye(2), np.zeros((2, 2)), np.zeros((2, 2))])
    assert essential_pencil_norm(model, r) == pytest.approx(1.0, abs=1e-12)
    # independent of the head
    other = BlockRepetitionModel(
        HermTuple([np.diag([9.0, -9.0]), np.diag([5.0, 5.0])]), model.body, 2
    )
    rng = np.random.default_rng(0)
    for _ in range(5):
        r = NormTestTuple(rng.normal(size=(3, 2, 2)) + 1j * rng.normal(size=(3, 2, 2)))
        assert essential_pencil_norm(model, r) == pytest.approx(
            essential_pencil_norm(other, r), abs=1e-12
        )


def test_essential_norm_below_truncated_norm():
    rng = np.random.default_rng(1)
    body = HermTuple([random_hermitian(2, rng) for _ in range(2)])
    head = HermTuple([random_hermitian(3, rng) * 2 for _ in range(2)])
    for n in (1, 2, 3):
        model = BlockRepetitionModel(head, body, n)
        a = model.materialized()
        for _ in range(5):
            r = NormTestTuple(rng.normal(size=(3, 2, 2)) + 1j * rng.normal(size=(3, 2, 2)))
            assert essential_pencil_norm(model, r) <= pencil_norm(r, a) + 1e-10


def test_essential_membership_segment():
    model = segment_model()
    mid = HermTuple([0.5, 0.5])
    out = HermTuple([1.0, 1.0])
    assert brute_support_margin([0.5, 0.5], model.body) <= 1e-12
    assert brute_support_margin([1.0, 1.0], model.body) > 0.5
    assert essential_membership(mid, model, seed=3).is_member
    assert essential_membership(out, model, seed=3).is_not_member


def test_essential_membership_ignores_head_and_level():
    model = segment_model()
    b = HermTuple([0.4, 0.6])
    v1 = essential_membership(b, model, seed=5)
    v2 = essential_membership(b, model.with_level(model.level + 1), seed=5)
    v3 = essential_membership(
        b, BlockRepetitionModel(HermTuple([7.0, -7.0]), model.body, 2), seed=5
    )
    assert v1.status == v2.status == v3.status == "member"


def test_deep_block_compression_is_member():
    rng = np.random.default_rng(2)
    body = HermTuple([random_hermitian(3, rng) for _ in range(2)])
    model = BlockRepetitionModel(HermTuple([random_hermitian(2, rng)] * 2), body, 3)
    a = model.materialized()
    # compression onto the last body block
    lo = model.head_dim + 2 * 3
    x = np.zeros((a.dim, 2), dtype=complex)
    x[lo:lo + 3, :] = np.linalg.qr(rng.normal(size=(3, 2)))[0]
    b = HermTuple([x.conj().T @ mat @ x for mat in a.mats])
    assert essential_membership(b, model, seed=7).is_member


def test_interior_test_identity_dependent():
    model = BlockRepetitionModel(
        HermTuple([np.eye(2)]), HermTuple([np.eye(3)]), 2
    )
    res = interior_test(model)
    assert not res.independent
    # witness proportional to (1, -1)
    w = res.witness
    assert abs(abs(w[0] / w[1]) - 1.0) < 1e-10 and np.sign(w[0]) != np.sign(w[1])
    assert np.linalg.norm(w[0] * np.eye(3) + w[1] * model.body.mats[0]) <= 1e-8


def test_interior_test_traceless_independent():
    model = BlockRepetitionModel(
        HermTuple([np.eye(1)]), HermTuple([np.diag([1.0, -1.0])]), 2
    )
    assert interior_test(model).independent


def test_dependent_relation_holds_on_members():
    rng = np.random.default_rng(3)
    m1 = random_hermitian(3, rng)
    m2 = 2.0 * np.eye(3) - 3.0 * m1
    model = BlockRepetitionModel(
        HermTuple([random_hermitian(2, rng)] * 2), HermTuple([m1, m2]), 2
    )
    res = interior_test(model)
    assert not res.independent
    a = res.witness
    for i in range(5):
        b, _ = random_member(model.body, 2, rng)
        rel = a[0] * np.eye(2) + a[1] * b.mats[0] + a[2] * b.mats[1]
        assert np.linalg.norm(rel, 2) <= 1e-7


def test_preserving_perturbation_trivial_when_head_is_body():
    rng = np.random.default_rng(4)
    body = HermTuple([random_hermitian(2, rng) for _ in range(2)])
    model = BlockRepetitionModel(body, body, 2)
    pt = preserving_perturbation(model)
    assert np.allclose(pt.k.mats, 0.0)
    assert pt.model is model


def test_preserving_perturbation_periodic_and_exact_norms():
    rng = np.random.default_rng(5)
    body = HermTuple([random_hermitian(2, rng) for _ in range(2)])
    head = HermTuple([random_hermitian(3, rng) * 2 for _ in range(2)])
    model = BlockRepetitionModel(head, body, 2)
    pt = preserving_perturbation(model)
    assert pt.model.head_dim == 4  # padded by (-3) mod 2 = 1
    assert pt.rank_bound <= model.head_dim + body.dim
    apk = pt.perturbed()
    s = pt.model.head_dim // body.dim + model.level
    expect = np.stack([np.kron(np.eye(s), body.mats[j]) for j in range(2)])
    assert np.allclose(apk.mats, expect, atol=1e-12)
    for i in range(20):
        r = NormTestTuple(rng.normal(size=(3, 2, 2)) + 1j * rng.normal(size=(3, 2, 2)))
        assert pencil_norm(r, apk) == pytest.approx(
            essential_pencil_norm(model, r), abs=1e-12
        )


def test_head_outlier_regression():
    # outlier eigenvalue 5 in the head: member of the truncated range, not of
    # the essential one; killed by the preserving perturbation
    model = BlockRepetitionModel(
        HermTuple([5.0]), HermTuple([np.diag([1.0, -1.0])]), 3
    )
    b = HermTuple([5.0])
    assert membership(b, model.materialized(), seed=9).is_member
    assert essential_membership(b, model, seed=9).is_not_member
    pt = preserving_perturbation(model)
    assert membership(b, pt.perturbed(), seed=9).is_not_member


def test_model_soundness_against_sampled_perturbations():
    rng = np.random.default_rng(6)
    body = HermTuple([random_hermitian(2, rng) for _ in range(2)])
    model = BlockRepetitionModel(HermTuple([random_hermitian(2, rng)] * 2), body, 2)
    b, _ = random_member(body, 2, rng, mix=0.2)
    assert essential_membership(b, model, seed=11).is_member
    for i in range(5):
        kp = random_head_perturbation(model, rng, scale=0.7)
        perturbed = HermTuple(model.materialized().mats + kp.mats)
        for _ in range(10):
            r = NormTestTuple(rng.normal(size=(3, 2, 2)) + 1j * rng.normal(size=(3, 2, 2)))
            assert check_inequality(r, b, perturbed).holds


def test_essential_range_cstar_convex():
    rng = np.random.default_rng(12)
    body = HermTuple([random_hermitian(3, rng) for _ in range(2)])
    model = BlockRepetitionModel(HermTuple([random_hermitian(2, rng)] * 2), body, 2)
    from matrange.choi import cstar_combine

    b1, _ = random_member(body, 2, rng, mix=0.15)
    b2, _ = random_member(body, 2, rng, mix=0.15)
    assert essential_membership(b1, model, seed=21).is_member
    assert essential_membership(b2, model, seed=21).is_member
    gs = [random_hermitian(2, rng) + 2 * np.eye(2) for _ in range(2)]
    s = sum(g.conj().T @ g for g in gs)
    w, u = np.linalg.eigh(s)
    inv_half = (u / np.sqrt(w)) @ u.conj().T
    combined = cstar_combine([b1, b2], [g @ inv_half for g in gs])
    assert not essential_membership(combined, model, seed=22).is_not_member


def test_support_margin_agrees_with_brute_force():
    rng = np.random.default_rng(7)
    body = HermTuple([random_hermitian(3, rng) for _ in range(2)])
    for _ in range(10):
        pt = rng.normal(size=2) * 1.5
        fast = support_margin(pt, body)
        slow = brute_support_margin(pt, body)
        assert fast == pytest.approx(slow, abs=1e-3)


def test_boundary_polyline_on_boundary():
    rng = np.random.default_rng(8)
    body = HermTuple([random_hermitian(3, rng) for _ in range(2)])
    poly = boundary_polyline(body, angle_count=180)
    assert poly.shape == (181, 2)
    assert np.allclose(poly[0], poly[-1])
    for pt in poly[:-1:10]:
        assert abs(support_margin(pt, body)) <= 1e-6


def test_support_values_vectorized():
    rng = np.random.default_rng(9)
    body = HermTuple([random_hermitian(3, rng) for _ in range(2)])
    dirs = rng.normal(size=(4, 2))
    vals = support_values(body, dirs)
    for i in range(4):
        w = np.linalg.eigvalsh(dirs[i, 0] * body.mats[0] + dirs[i, 1] * body.mats[1])[-1]
        assert vals[i] == pytest.approx(w, abs=1e-12)
