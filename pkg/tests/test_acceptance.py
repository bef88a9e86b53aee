"""Acceptance suite: every criterion at its stated size and tolerance.

Each test prints one PASS/FAIL line; the underlying sizes and tolerances are
the full-scale defaults of matrange.suite (scale=1.0).  Determinism is
exercised end to end through the CLI at a reduced scale (byte-identical
reports are scale-independent).
"""

import json
import os
import subprocess
import sys

from matrange.suite import (
    criterion_block_compression,
    criterion_cstar_convexity,
    criterion_essential_model,
    criterion_interior_dichotomy,
    criterion_norm_consistency,
    criterion_preservation_pipeline,
    criterion_simplex_dilation,
)

SEED = 7


def _report(c):
    line = f"{'PASS' if c['passed'] else 'FAIL'}  {c['id']}: {c['name']}"
    print(line)
    assert c["passed"], c["failures"]


def test_criterion_1_norm_consistency():
    c = criterion_norm_consistency(SEED, scale=1.0)
    assert c["counts"]["instances"] == 50
    assert c["counts"]["trials_per_member"] == 1000
    _report(c)


def test_criterion_2_essential_model_identity():
    c, boundaries = criterion_essential_model(SEED, scale=1.0)
    assert c["counts"]["models"] == 20
    assert c["counts"]["q1_probes_checked"] + c["counts"]["q1_probes_in_band"] == 20 * 200
    assert c["counts"]["q2_perturbations"] == 10
    assert boundaries and all(len(b["points"]) > 100 for b in boundaries)
    _report(c)


def test_criterion_3_cstar_convexity():
    c = criterion_cstar_convexity(SEED, scale=1.0)
    assert c["counts"]["combinations"] == 500
    _report(c)


def test_criterion_4_interior_dichotomy():
    c = criterion_interior_dichotomy(SEED, scale=1.0)
    assert c["counts"]["dependent_models"] == 10
    assert c["counts"]["independent_models"] == 10
    assert all(r > 0 for r in c["counts"]["radii"])
    _report(c)


def test_criterion_5_simplex_dilation():
    c = criterion_simplex_dilation(SEED, scale=1.0)
    assert c["counts"]["tuples"] == 100
    assert c["counts"]["r_samples"] == 200
    _report(c)


def test_criterion_6_block_compression():
    c = criterion_block_compression(SEED, scale=1.0)
    assert c["counts"]["ranks"] == [1, 2]
    _report(c)


def test_criterion_7_preservation_pipeline():
    c = criterion_preservation_pipeline(SEED, scale=1.0)
    assert c["counts"]["models"] == 10
    _report(c)


def test_criterion_8_theoremsuite_determinism(tmp_path):
    def run(out):
        return subprocess.run(
            [sys.executable, "-m", "matrange.cli", "theoremsuite",
             "--seed", "7", "--scale", "0.2", "--out", str(out)],
            capture_output=True, text=True, env=dict(os.environ),
        )

    out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
    r1 = run(out1)
    r2 = run(out2)
    assert r1.returncode == 0, r1.stderr
    assert r2.returncode == 0, r2.stderr
    identical = out1.read_bytes() == out2.read_bytes()
    report = json.loads(out1.read_text())
    ok = identical and report["passed"]
    print(f"{'PASS' if ok else 'FAIL'}  determinism: theoremsuite --seed 7 twice, byte-identical")
    assert identical
    assert report["passed"]
