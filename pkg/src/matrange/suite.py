"""Deterministic verification suite behind ``matrange theoremsuite``.

Each criterion returns a dict with a pass flag and enough counts to audit
what ran; the CLI renders the table and the acceptance tests assert the
flags.  All randomness flows from the root seed through ``fold_seed``, so a
fixed seed reproduces the report byte for byte.  ``scale`` multiplies trial
counts (1.0 = full size).
"""

from __future__ import annotations

import numpy as np

from .choi import cstar_combine, membership, random_member
from .core import (
    HermTuple,
    fold_seed,
    pencil_norms,
    random_hermitian,
    spectral_norm,
)
from .errors import TruncationTooSmallError
from .essential import (
    BlockRepetitionModel,
    boundary_polyline,
    essential_membership,
    interior_test,
    preserving_perturbation,
    random_head_perturbation,
    support_margin,
    support_values,
)
from .lambdapq import lambda_ess_check
from .simplex import Simplex, barycentric_povm, dilation_operator, naimark_dilate, simplex_preservation_check
from .spatial import block_compress
from .witness import check_inequality, search_witness, vertex_pencil_norms


def _count(base, scale):
    return max(1, int(round(base * scale)))


def _fails(entries, cap=5):
    return entries[:cap] + ([f"... {len(entries) - cap} more"] if len(entries) > cap else [])


def _push_outside(b, a, rng, margin=0.5):
    """A sound non-member: shift one component's top eigenvalue past the
    reference norm (the axis pencil then violates the norm criterion)."""
    j = int(rng.integers(0, b.m))
    mats = [mat.copy() for mat in b.mats]
    shift = spectral_norm(a.mats[j]) + margin - float(np.linalg.eigvalsh(mats[j])[-1])
    mats[j] = mats[j] + shift * np.eye(b.dim)
    return HermTuple(mats)


def criterion_norm_consistency(seed, scale=1.0):
    """Membership verdicts never contradict the norm characterization."""
    instances = _count(50, scale)
    trials = _count(1000, scale)
    rng = np.random.default_rng(fold_seed(seed, 10))
    failures = []
    members = outsiders = inconclusive = 0
    for i in range(instances):
        a = HermTuple([random_hermitian(6, rng) for _ in range(2)])
        inside = i % 2 == 0
        if inside:
            b, _ = random_member(a, 2, rng, mix=0.15)
        else:
            b = _push_outside(random_member(a, 2, rng, mix=0.0)[0], a, rng)
        verdict = membership(b, a, seed=fold_seed(seed, 11, i))
        if verdict.is_member:
            members += 1
            if not inside:
                failures.append(f"instance {i}: outsider certified member")
                continue
            stack = (rng.normal(size=(trials, 3, 2, 2))
                     + 1j * rng.normal(size=(trials, 3, 2, 2)))
            viol = pencil_norms(stack, b.mats) - pencil_norms(stack, a.mats)
            if float(viol.max()) > 1e-6:
                failures.append(f"instance {i}: random trial violation {viol.max():.2e}")
            w = search_witness(b, a, budget=20000, seed=fold_seed(seed, 12, i))
            if w is not None:
                failures.append(f"instance {i}: witness found against a member")
        elif verdict.is_not_member:
            outsiders += 1
            if inside:
                failures.append(f"instance {i}: member refuted")
                continue
            res = check_inequality(verdict.witness, b, a)
            if res.lhs <= res.rhs + 1e-6:
                failures.append(f"instance {i}: witness does not re-verify")
        else:
            inconclusive += 1
            if not inside:
                failures.append(f"instance {i}: clear outsider left inconclusive")
    return {
        "id": "membership-norm-consistency",
        "name": "norm characterization vs membership verdicts",
        "passed": not failures,
        "counts": {
            "instances": instances,
            "member_verdicts": members,
            "not_member_verdicts": outsiders,
            "inconclusive": inconclusive,
            "trials_per_member": trials,
        },
        "failures": _fails(failures),
    }


def criterion_essential_model(seed, scale=1.0):
    """Essential membership agrees with the support-function oracle (q=1) and
    survives sampled head perturbations (q=2)."""
    models = _count(20, scale)
    probes = _count(200, scale)
    perturbations = _count(10, scale)
    rng = np.random.default_rng(fold_seed(seed, 20))
    failures = []
    boundaries = []
    checked = skipped = 0
    for mi in range(models):
        d = int(rng.integers(2, 4))
        h = int(rng.integers(1, 4))
        body = HermTuple([random_hermitian(d, rng) for _ in range(2)])
        head = HermTuple([random_hermitian(h, rng) * 1.5 for _ in range(2)])
        model = BlockRepetitionModel(head, body, 2)
        if len(boundaries) < 4:
            boundaries.append({
                "model": mi,
                "points": np.round(boundary_polyline(body, angle_count=180), 12).tolist(),
            })
        axes = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        vals = support_values(body, axes)
        hi = np.array([vals[0], vals[2]])
        lo = -np.array([vals[1], vals[3]])
        center, half = (hi + lo) / 2, (hi - lo) / 2 * 1.3
        for pi in range(probes):
            pt = center + rng.uniform(-1, 1, size=2) * half
            margin = support_margin(pt, body)
            if abs(margin) <= 1e-4:
                skipped += 1
                continue
            checked += 1
            verdict = essential_membership(
                HermTuple(list(pt)), model, seed=fold_seed(seed, 21, mi, pi)
            )
            expect = "member" if margin < 0 else "not_member"
            if verdict.status != expect:
                failures.append(
                    f"model {mi} probe {pi}: margin {margin:.2e} but {verdict.status}"
                )
        apn = model.materialized()
        for bi in range(3):
            b, _ = random_member(body, 2, rng, mix=0.1)
            for ki in range(perturbations):
                kp = random_head_perturbation(model, rng, scale=0.6)
                perturbed = HermTuple(apn.mats + kp.mats)
                # true members by containment; near-boundary geometries may
                # need more than the default iteration budget to certify
                verdict = membership(b, perturbed, max_iter=60000,
                                     seed=fold_seed(seed, 22, mi, bi, ki))
                if not verdict.is_member:
                    failures.append(
                        f"model {mi} member {bi} perturbation {ki}: {verdict.status}"
                    )
    return {
        "id": "essential-model-identity",
        "name": "essential membership vs support oracle and head perturbations",
        "passed": not failures,
        "counts": {
            "models": models,
            "q1_probes_checked": checked,
            "q1_probes_in_band": skipped,
            "q2_perturbations": perturbations,
        },
        "failures": _fails(failures),
    }, boundaries


def criterion_cstar_convexity(seed, scale=1.0):
    """Operator convex combinations of members are never refuted."""
    combos = _count(500, scale)
    rng = np.random.default_rng(fold_seed(seed, 30))
    bases = []
    for _ in range(2):
        a = HermTuple([random_hermitian(5, rng) for _ in range(2)])
        members = [random_member(a, 2, rng, mix=0.15)[0] for _ in range(6)]
        bases.append((a, members))
    failures = []
    rejected = 0
    for ci in range(combos):
        a, members = bases[ci % 2]
        b1, b2 = rng.choice(len(members), size=2, replace=False)
        gs = [rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(2)]
        s = sum(g.conj().T @ g for g in gs)
        w, u = np.linalg.eigh(s)
        inv_half = (u / np.sqrt(np.maximum(w, 1e-12))) @ u.conj().T
        ls = [g @ inv_half for g in gs]
        combined = cstar_combine([members[b1], members[b2]], ls)
        verdict = membership(combined, a, seed=fold_seed(seed, 31, ci))
        if verdict.is_not_member:
            rejected += 1
            failures.append(f"combo {ci}: refuted with gap {verdict.gap:.2e}")
    return {
        "id": "cstar-convexity",
        "name": "C*-convex combinations stay members",
        "passed": not failures,
        "counts": {"combinations": combos, "rejected": rejected},
        "failures": _fails(failures),
    }


def _find_interior_radius(body, center, rng, seed, q1_kwargs):
    extent = float(np.max(np.abs(support_values(body, np.concatenate(
        [np.eye(body.m), -np.eye(body.m)])))))
    r = max(extent, 1e-2)
    ring = []
    for sx in (-1.0, 0.0, 1.0):
        for sy in (-1.0, 0.0, 1.0):
            if sx or sy:
                ring.append(np.array([sx, sy]))
    for _ in range(14):
        ok = True
        for k, u in enumerate(ring):
            pt = center + r * u / max(np.abs(u))  # on the sup-norm sphere
            verdict = membership(HermTuple(list(pt)), body,
                                 seed=fold_seed(seed, 41, k), **q1_kwargs)
            if not verdict.is_member:
                ok = False
                break
        if ok:
            return r
        r *= 0.5
    return 0.0


def criterion_interior_dichotomy(seed, scale=1.0):
    """Independence of {I, M_j} matches the interior probe outcome."""
    per_kind = _count(10, scale)
    rng = np.random.default_rng(fold_seed(seed, 40))
    failures = []
    radii = []
    for i in range(per_kind):
        m1 = random_hermitian(3, rng)
        coeffs = rng.normal(size=2)
        m2 = coeffs[0] * np.eye(3) + coeffs[1] * m1
        body = HermTuple([m1, m2])
        model = BlockRepetitionModel(HermTuple([random_hermitian(2, rng)] * 2), body, 2)
        res = interior_test(model)
        if res.independent:
            failures.append(f"dependent model {i} reported independent")
            continue
        a = res.witness
        for pi in range(5):
            qprobe = 1 if pi % 2 == 0 else 2
            b, _ = random_member(body, qprobe, rng)
            rel = a[0] * np.eye(qprobe) + a[1] * b.mats[0] + a[2] * b.mats[1]
            if spectral_norm(rel) > 1e-7:
                failures.append(f"dependent model {i} probe {pi}: relation {spectral_norm(rel):.2e}")
    for i in range(per_kind):
        body = HermTuple([random_hermitian(3, rng) for _ in range(2)])
        model = BlockRepetitionModel(HermTuple([random_hermitian(1, rng)] * 2), body, 2)
        res = interior_test(model)
        if not res.independent:
            failures.append(f"independent model {i} reported dependent")
            continue
        center = np.array([float(np.real(np.trace(mat))) / 3.0 for mat in body.mats])
        r = _find_interior_radius(body, center, rng, fold_seed(seed, 42, i), {})
        radii.append(r)
        if r <= 0.0:
            failures.append(f"independent model {i}: no member ball found")
            continue
        for pi in range(4):
            deltas = []
            for j in range(2):
                g = random_hermitian(2, rng)
                g *= (0.9 * r / 2.0) / max(spectral_norm(g), 1e-12)
                deltas.append(center[j] * np.eye(2) + g)
            verdict = membership(HermTuple(deltas), body,
                                 seed=fold_seed(seed, 43, i, pi))
            if not verdict.is_member:
                failures.append(f"independent model {i} matrix probe {pi}: {verdict.status}")
    return {
        "id": "interior-dichotomy",
        "name": "interior test vs probe balls",
        "passed": not failures,
        "counts": {
            "dependent_models": per_kind,
            "independent_models": per_kind,
            "radii": [round(r, 6) for r in radii],
        },
        "failures": _fails(failures),
    }


def criterion_simplex_dilation(seed, scale=1.0):
    """Barycentric POVMs, Naimark dilations and the vertex norm bound."""
    tuples = _count(100, scale)
    r_samples = _count(200, scale)
    rng = np.random.default_rng(fold_seed(seed, 50))
    failures = []
    for ti in range(tuples):
        while True:
            verts = rng.normal(size=(3, 2)) * 1.5
            try:
                s = Simplex(verts, cond_threshold=1e4)
                break
            except Exception:
                continue
        gs = [random_hermitian(5, rng) + 3.0 * np.eye(5) for _ in range(3)]
        gs = [g @ g for g in gs]
        total = sum(gs)
        w, u = np.linalg.eigh(total)
        inv_half = (u / np.sqrt(w)) @ u.conj().T
        qs = [inv_half @ g @ inv_half for g in gs]
        t = HermTuple([sum(s.vertices[k, j] * qs[k] for k in range(3)) for j in range(2)])
        try:
            povm = barycentric_povm(t, s)
        except Exception as exc:
            failures.append(f"tuple {ti}: barycentric POVM failed: {exc}")
            continue
        x = naimark_dilate(povm)
        big = dilation_operator(s, 5)
        resid = max(
            spectral_norm(x.x.conj().T @ big.mats[j] @ x.x - t.mats[j]) for j in range(2)
        )
        if resid > 1e-8:
            failures.append(f"tuple {ti}: dilation residual {resid:.2e}")
        stack = (rng.normal(size=(r_samples, 3, 2, 2))
                 + 1j * rng.normal(size=(r_samples, 3, 2, 2)))
        slack = pencil_norms(stack, t.mats) - vertex_pencil_norms(stack, s.vertices)
        if float(slack.max()) > 1e-9:
            failures.append(f"tuple {ti}: norm bound violated by {slack.max():.2e}")
        d = s.diag_tuple()
        eq_stack = (rng.normal(size=(20, 3, 2, 2)) + 1j * rng.normal(size=(20, 3, 2, 2)))
        eq_gap = np.abs(pencil_norms(eq_stack, d.mats) - vertex_pencil_norms(eq_stack, s.vertices))
        if float(eq_gap.max()) > 1e-10:
            failures.append(f"tuple {ti}: vertex equality off by {eq_gap.max():.2e}")
    return {
        "id": "simplex-dilation",
        "name": "simplex dilation and vertex norm bounds",
        "passed": not failures,
        "counts": {"tuples": tuples, "r_samples": r_samples},
        "failures": _fails(failures),
    }


def criterion_block_compression(seed, scale=1.0):
    """Block-diagonal compressions hit all targets with vanishing coupling."""
    runs = max(1, int(round(scale)))
    rng = np.random.default_rng(fold_seed(seed, 60))
    failures = []
    for run in range(runs):
        body = HermTuple([random_hermitian(3, rng) for _ in range(2)])
        head = HermTuple([random_hermitian(2, rng) for _ in range(2)])
        for p in (1, 2):
            targets = [random_member(body, p, rng, mix=0.25)[0] for _ in range(3)]
            model = BlockRepetitionModel(head, body, 2)
            try:
                out = block_compress(model, targets, eps=1e-6, seed=fold_seed(seed, 61, run, p))
            except TruncationTooSmallError as exc:
                out = block_compress(model.with_level(exc.required_level), targets,
                                     eps=1e-6, seed=fold_seed(seed, 61, run, p))
            if out.off_diagonal_max > 1e-9:
                failures.append(f"run {run} p={p}: off-diagonal {out.off_diagonal_max:.2e}")
            for i, (blk, tgt) in enumerate(zip(out.blocks, targets)):
                dev = max(spectral_norm(blk.mats[j] - tgt.mats[j]) for j in range(2))
                if dev > 1e-6:
                    failures.append(f"run {run} p={p} block {i}: deviation {dev:.2e}")
            for si, stage in enumerate(out.stages):
                if stage["y_x1"] > 1e-9 or stage["y_a_x1"] > 1e-9:
                    failures.append(f"run {run} p={p} stage {si}: orthogonality broken")
    return {
        "id": "block-compression",
        "name": "inductive block-diagonal compression",
        "passed": not failures,
        "counts": {"runs": runs, "targets_per_run": 3, "ranks": [1, 2]},
        "failures": _fails(failures),
    }


def _random_simplex_body(rng):
    while True:
        verts = rng.normal(size=(3, 2)) * 1.5
        try:
            s = Simplex(verts, cond_threshold=1e3)
        except Exception:
            continue
        return s, s.diag_tuple()


def criterion_preservation_pipeline(seed, scale=1.0):
    """Preserving perturbation, simplex preservation and rank-(p,q) checks."""
    models = _count(10, scale)
    rng = np.random.default_rng(fold_seed(seed, 70))
    failures = []
    simplex_checked = lambda_checked = 0
    for mi in range(models):
        simplex_valued = mi % 5 != 4  # majority simplex-valued, some generic
        if simplex_valued:
            s, body = _random_simplex_body(rng)
            h = int(rng.integers(1, 3))
            head_mats = [random_hermitian(h, rng) for _ in range(2)]
            if mi % 3 == 0:
                head_mats[0] = head_mats[0] + 4.0 * np.eye(h)  # head outlier
            head = HermTuple(head_mats)
        else:
            s = None
            body = HermTuple([random_hermitian(2, rng) for _ in range(2)])
            head = HermTuple([random_hermitian(2, rng) for _ in range(2)])
        model = BlockRepetitionModel(head, body, 2)
        pt = preserving_perturbation(model)
        apk = pt.perturbed()
        stack = (rng.normal(size=(20, 3, 2, 2)) + 1j * rng.normal(size=(20, 3, 2, 2)))
        agree = np.abs(pencil_norms(stack, apk.mats) - pencil_norms(stack, body.mats))
        if float(agree.max()) > 1e-10:
            failures.append(f"model {mi}: perturbed pencil norms differ by {agree.max():.2e}")
        deep = {"max_iter": 60000}
        if simplex_valued:
            simplex_checked += 1
            for q in (1, 2, 3):
                report = simplex_preservation_check(
                    model, s, q, probes=_count(3, scale), r_samples=_count(40, scale),
                    seed=fold_seed(seed, 71, mi, q), member_kwargs=deep,
                )
                if not report["passed"]:
                    failures.append(f"model {mi} q={q}: simplex preservation failed")
        if mi % 2 == 0:
            lambda_checked += 1
            report = lambda_ess_check(model, p=2, q=2, probes=3,
                                      seed=fold_seed(seed, 72, mi), member_kwargs=deep)
            if not report["passed"]:
                failures.append(f"model {mi}: lambda check failed")
    # head-outlier regression, fixed instance
    reg = BlockRepetitionModel(HermTuple([5.0]), HermTuple([np.diag([1.0, -1.0])]), 3)
    b = HermTuple([5.0])
    before = membership(b, reg.materialized(), seed=fold_seed(seed, 73))
    ess = essential_membership(b, reg, seed=fold_seed(seed, 73))
    after = membership(b, preserving_perturbation(reg).perturbed(), seed=fold_seed(seed, 73))
    if not (before.is_member and ess.is_not_member and after.is_not_member):
        failures.append(
            f"head-outlier regression: {before.status}/{ess.status}/{after.status}"
        )
    return {
        "id": "preservation-pipeline",
        "name": "preserving perturbation, simplex and rank-(p,q) pipeline",
        "passed": not failures,
        "counts": {
            "models": models,
            "simplex_checked": simplex_checked,
            "lambda_checked": lambda_checked,
        },
        "failures": _fails(failures),
    }


def run_suite(seed=7, scale=1.0):
    """Run all criteria; returns the JSON-ready report."""
    c2, boundaries = criterion_essential_model(seed, scale)
    criteria = [
        criterion_norm_consistency(seed, scale),
        c2,
        criterion_cstar_convexity(seed, scale),
        criterion_interior_dichotomy(seed, scale),
        criterion_simplex_dilation(seed, scale),
        criterion_block_compression(seed, scale),
        criterion_preservation_pipeline(seed, scale),
    ]
    return {
        "suite": "matrange-theoremsuite",
        "seed": int(seed),
        "scale": float(scale),
        "passed": all(c["passed"] for c in criteria),
        "criteria": criteria,
        "boundaries": boundaries,
    }
