"""Command-line front door.

Subcommands: member, witness, dilate, essential, perturb, lambda,
theoremsuite, report.  All I/O uses the shared JSON encodings; membership
verdicts map to exit codes 0 (member), 1 (not member), 2 (inconclusive).
Malformed JSON exits 64, schema/dimension problems exit 65, other errors 70.
Randomness: --seed wins, else MATRANGE_SEED, else 0.
"""

from __future__ import annotations

import json
import os
import sys

import click
import numpy as np

from . import serialize
from .choi import membership
from .core import fold_seed, pencil_norm
from .errors import MatrangeError, SchemaError
from .essential import (
    boundary_polyline,
    essential_pencil_norm,
    essential_membership,
    interior_test,
    preserving_perturbation,
    support_margin,
)
from .lambdapq import lambda_realize, lambda_search
from .simplex import barycentric_povm, dilation_operator, naimark_dilate
from .suite import run_suite
from .witness import search_witness

EXIT_BY_STATUS = {"member": 0, "not_member": 1, "inconclusive": 2}
EXIT_BAD_JSON = 64
EXIT_BAD_SCHEMA = 65
EXIT_ERROR = 70


class _ExitWith(Exception):
    def __init__(self, code, message):
        self.code = code
        self.message = message
        super().__init__(message)


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise _ExitWith(EXIT_BAD_JSON, f"cannot open {path}")
    except json.JSONDecodeError as exc:
        raise _ExitWith(EXIT_BAD_JSON, f"{path}: malformed JSON: {exc}")


def _parse(path, parser, field):
    obj = _load_json(path)
    try:
        return parser(obj, field)
    except SchemaError as exc:
        raise _ExitWith(EXIT_BAD_SCHEMA, f"{path}: {exc}")


def _emit(obj):
    sys.stdout.write(serialize.dumps(obj))


def _resolve_seed(seed):
    if seed is not None:
        return int(seed)
    env = os.environ.get("MATRANGE_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise _ExitWith(EXIT_BAD_SCHEMA, f"MATRANGE_SEED={env!r} is not an integer")
    return 0


@click.group()
def cli():
    """Joint q-matricial ranges: membership, witnesses, dilations, models."""


@cli.command("member")
@click.option("--A", "a_path", type=click.Path(), default=None, help="finite tuple JSON")
@click.option("--model", "model_path", type=click.Path(), default=None,
              help="block-repetition model JSON (essential membership)")
@click.option("--B", "b_path", type=click.Path(), required=True, help="candidate tuple JSON")
@click.option("--q", "q_expected", type=int, default=None, help="expected dimension of B")
@click.option("--tol", type=float, default=1e-6, help="refutation gap tolerance")
@click.option("--max-iter", type=int, default=5000)
@click.option("--budget", type=int, default=20000, help="witness search budget")
@click.option("--seed", type=int, default=None)
def cmd_member(a_path, model_path, b_path, q_expected, tol, max_iter, budget, seed):
    """Decide membership of B in the range of A (or a model's essential range)."""
    seed = _resolve_seed(seed)
    if (a_path is None) == (model_path is None):
        raise _ExitWith(EXIT_BAD_SCHEMA, "exactly one of --A / --model is required")
    b = _parse(b_path, serialize.herm_tuple_from_json, "B")
    if q_expected is not None and b.dim != q_expected:
        raise _ExitWith(EXIT_BAD_SCHEMA, f"q: B has dimension {b.dim}, expected {q_expected}")
    kwargs = dict(max_iter=max_iter, gap_tol=tol, witness_budget=budget, seed=seed)
    try:
        if a_path is not None:
            a = _parse(a_path, serialize.herm_tuple_from_json, "A")
            verdict = membership(b, a, **kwargs)
        else:
            model = _parse(model_path, serialize.model_from_json, "model")
            verdict = essential_membership(b, model, **kwargs)
    except MatrangeError as exc:
        raise _ExitWith(EXIT_BAD_SCHEMA, str(exc))
    _emit(serialize.verdict_to_json(verdict))
    sys.exit(EXIT_BY_STATUS[verdict.status])


@cli.command("witness")
@click.option("--A", "a_path", type=click.Path(), default=None)
@click.option("--model", "model_path", type=click.Path(), default=None)
@click.option("--simplex", "simplex_path", type=click.Path(), default=None)
@click.option("--B", "b_path", type=click.Path(), required=True)
@click.option("--budget", type=int, default=20000)
@click.option("--tol", type=float, default=1e-6)
@click.option("--seed", type=int, default=None)
def cmd_witness(a_path, model_path, simplex_path, b_path, budget, tol, seed):
    """Search for coefficients refuting membership of B."""
    seed = _resolve_seed(seed)
    refs = [p for p in (a_path, model_path, simplex_path) if p is not None]
    if len(refs) != 1:
        raise _ExitWith(EXIT_BAD_SCHEMA, "exactly one of --A / --model / --simplex is required")
    b = _parse(b_path, serialize.herm_tuple_from_json, "B")
    if a_path is not None:
        ref = _parse(a_path, serialize.herm_tuple_from_json, "A")
    elif model_path is not None:
        ref = _parse(model_path, serialize.model_from_json, "model")
    else:
        ref = _parse(simplex_path, serialize.simplex_from_json, "simplex")
    try:
        w = search_witness(b, ref, budget=budget, seed=seed, gap_tol=tol)
    except MatrangeError as exc:
        raise _ExitWith(EXIT_BAD_SCHEMA, str(exc))
    if w is None:
        _emit({"found": False})
        sys.exit(2)
    from .witness import reference_for

    gap = pencil_norm(w, b) - reference_for(ref).norm(w)
    _emit({"found": True, "gap": gap, "witness": serialize.tuple_to_json(w)})
    sys.exit(0)


@cli.command("dilate")
@click.option("--T", "t_path", type=click.Path(), required=True)
@click.option("--simplex", "simplex_path", type=click.Path(), required=True)
def cmd_dilate(t_path, simplex_path):
    """Barycentric POVM and Naimark dilation of T inside a simplex."""
    t = _parse(t_path, serialize.herm_tuple_from_json, "T")
    s = _parse(simplex_path, serialize.simplex_from_json, "simplex")
    try:
        povm = barycentric_povm(t, s)
        x = naimark_dilate(povm)
    except MatrangeError as exc:
        raise _ExitWith(EXIT_BAD_SCHEMA, str(exc))
    big = dilation_operator(s, t.dim)
    residual = max(
        float(np.linalg.norm(x.x.conj().T @ big.mats[j] @ x.x - t.mats[j], 2))
        for j in range(t.m)
    )
    _emit({
        "povm": [serialize.matrix_to_json(e) for e in povm.elements],
        "isometry": serialize.isometry_to_json(x),
        "reconstruction_residual": residual,
    })
    sys.exit(0)


@cli.command("essential")
@click.option("--model", "model_path", type=click.Path(), required=True)
@click.option("--B", "b_path", type=click.Path(), default=None)
@click.option("--R", "r_path", type=click.Path(), default=None,
              help="coefficient tuple JSON for the essential pencil norm")
@click.option("--seed", type=int, default=None)
def cmd_essential(model_path, b_path, r_path, seed):
    """Essential-range data of a model: independence, norms, membership."""
    seed = _resolve_seed(seed)
    model = _parse(model_path, serialize.model_from_json, "model")
    out = {
        "head_dim": model.head_dim,
        "body_dim": model.body_dim,
        "level": model.level,
    }
    res = interior_test(model)
    out["interior"] = {
        "independent": bool(res.independent),
        "witness": None if res.witness is None else [float(x) for x in res.witness],
    }
    if r_path is not None:
        robj = _parse(r_path, serialize.norm_tuple_from_json, "R")
        out["essential_pencil_norm"] = float(essential_pencil_norm(model, robj))
    exit_code = 0
    if b_path is not None:
        b = _parse(b_path, serialize.herm_tuple_from_json, "B")
        try:
            verdict = essential_membership(b, model, seed=seed)
        except MatrangeError as exc:
            raise _ExitWith(EXIT_BAD_SCHEMA, str(exc))
        out["verdict"] = serialize.verdict_to_json(verdict)
        exit_code = EXIT_BY_STATUS[verdict.status]
    _emit(out)
    sys.exit(exit_code)


@cli.command("perturb")
@click.option("--model", "model_path", type=click.Path(), required=True)
@click.option("--samples", type=int, default=20, help="coefficient samples for verification")
@click.option("--seed", type=int, default=None)
def cmd_perturb(model_path, samples, seed):
    """Preserving head perturbation K plus a norm-agreement verification."""
    seed = _resolve_seed(seed)
    model = _parse(model_path, serialize.model_from_json, "model")
    pt = preserving_perturbation(model)
    apk = pt.perturbed()
    rng = np.random.default_rng(fold_seed(seed, 90))
    q = 2
    worst = 0.0
    from .core import pencil_norms

    stack = (rng.normal(size=(samples, model.m + 1, q, q))
             + 1j * rng.normal(size=(samples, model.m + 1, q, q)))
    worst = float(np.abs(
        pencil_norms(stack, apk.mats) - pencil_norms(stack, model.body.mats)
    ).max())
    _emit({
        "K": serialize.tuple_to_json(pt.k),
        "rank_bound": pt.rank_bound,
        "padded": pt.model.head_dim != model.head_dim,
        "model": serialize.model_to_json(pt.model),
        "verification": {
            "samples": samples,
            "max_pencil_norm_deviation": worst,
        },
    })
    sys.exit(0)


@cli.command("lambda")
@click.option("--model", "model_path", type=click.Path(), default=None)
@click.option("--A", "a_path", type=click.Path(), default=None,
              help="general finite tuple (search mode)")
@click.option("--B", "b_path", type=click.Path(), required=True)
@click.option("--p", "p", type=int, default=2)
@click.option("--budget", type=int, default=6000)
@click.option("--seed", type=int, default=None)
def cmd_lambda(model_path, a_path, b_path, p, budget, seed):
    """Realize (model) or search (general tuple) I_p (x) B as a compression."""
    seed = _resolve_seed(seed)
    if (a_path is None) == (model_path is None):
        raise _ExitWith(EXIT_BAD_SCHEMA, "exactly one of --A / --model is required")
    b = _parse(b_path, serialize.herm_tuple_from_json, "B")
    from .errors import CertificateError, TruncationTooSmallError

    try:
        if model_path is not None:
            model = _parse(model_path, serialize.model_from_json, "model")
            try:
                x = lambda_realize(b, model, p, seed=seed)
            except TruncationTooSmallError as exc:
                x = lambda_realize(b, model.with_level(exc.required_level), p, seed=seed)
            _emit({"found": True, "isometry": serialize.isometry_to_json(x)})
            sys.exit(0)
        a = _parse(a_path, serialize.herm_tuple_from_json, "A")
        x = lambda_search(b, a, p, budget=budget, seed=seed)
    except CertificateError as exc:
        _emit({"found": False, "reason": str(exc)})
        sys.exit(1)
    except MatrangeError as exc:
        raise _ExitWith(EXIT_BAD_SCHEMA, str(exc))
    if x is None:
        _emit({"found": False})
        sys.exit(2)
    _emit({"found": True, "isometry": serialize.isometry_to_json(x)})
    sys.exit(0)


@cli.command("theoremsuite")
@click.option("--seed", type=int, default=None)
@click.option("--scale", type=float, default=1.0, help="trial-count multiplier")
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="write the JSON report here instead of stdout")
def cmd_theoremsuite(seed, scale, out_path):
    """Run the full verification suite; table on stderr, JSON report on stdout."""
    seed = _resolve_seed(seed)
    report = run_suite(seed=seed, scale=scale)
    for c in report["criteria"]:
        flag = "PASS" if c["passed"] else "FAIL"
        click.echo(f"{flag}  {c['id']}: {c['name']}", err=True)
    payload = serialize.dumps(report)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)
    sys.exit(0 if report["passed"] else 1)


@cli.command("report")
@click.option("--model", "model_path", type=click.Path(), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--samples", type=int, default=40, help="membership probes")
@click.option("--q", "q", type=int, default=1)
@click.option("--seed", type=int, default=None)
def cmd_report(model_path, out_dir, samples, q, seed):
    """Boundary figure, delimited boundary/probe data and a JSON summary."""
    seed = _resolve_seed(seed)
    model = _parse(model_path, serialize.model_from_json, "model")
    os.makedirs(out_dir, exist_ok=True)
    body = model.body
    out = {"head_dim": model.head_dim, "body_dim": model.body_dim, "level": model.level}
    rng = np.random.default_rng(fold_seed(seed, 91))

    probe_rows = []
    probe_points = []
    if q == 1 and body.m == 2:
        from .core import HermTuple
        from .essential import support_values

        axes = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        vals = support_values(body, axes)
        hi = np.array([vals[0], vals[2]])
        lo = -np.array([vals[1], vals[3]])
        center, half = (hi + lo) / 2, (hi - lo) / 2 * 1.25
        for i in range(samples):
            pt = center + rng.uniform(-1, 1, size=2) * half
            verdict = essential_membership(HermTuple(list(pt)), model,
                                           seed=fold_seed(seed, 92, i))
            margin = support_margin(pt, body)
            probe_rows.append((i, pt[0], pt[1], verdict.status, verdict.gap, margin))
            probe_points.append(((pt[0], pt[1]), verdict.status))
        with open(os.path.join(out_dir, "probes.csv"), "w", encoding="utf-8") as fh:
            fh.write("index,x,y,status,gap,support_margin\n")
            for row in probe_rows:
                fh.write(f"{row[0]},{row[1]!r},{row[2]!r},{row[3]},{row[4]!r},{row[5]!r}\n")
        out["probes"] = {
            "count": samples,
            "member": sum(1 for r in probe_rows if r[3] == "member"),
            "not_member": sum(1 for r in probe_rows if r[3] == "not_member"),
            "inconclusive": sum(1 for r in probe_rows if r[3] == "inconclusive"),
        }

    if body.m == 2:
        poly = boundary_polyline(body)
        with open(os.path.join(out_dir, "boundary.csv"), "w", encoding="utf-8") as fh:
            fh.write("x,y\n")
            for xx, yy in poly:
                fh.write(f"{xx!r},{yy!r}\n")
        from .plots import render_boundary_figure

        fig_path = os.path.join(out_dir, "boundary.png")
        render_boundary_figure(fig_path, poly, probes=probe_points,
                               title="essential joint range (body)")
        out["boundary_points"] = int(poly.shape[0])
        out["figure"] = "boundary.png"
        out["boundary_csv"] = "boundary.csv"
    else:
        out["note"] = "boundary rendering requires m = 2"

    res = interior_test(model)
    out["interior"] = {"independent": bool(res.independent)}
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        fh.write(serialize.dumps(out))
    click.echo(f"report written to {out_dir}", err=True)
    sys.exit(0)


def main():
    try:
        cli.main(standalone_mode=False)
    except _ExitWith as exc:
        click.echo(f"error: {exc.message}", err=True)
        sys.exit(exc.code)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        sys.exit(EXIT_BAD_JSON)
    except click.ClickException as exc:
        exc.show()
        sys.exit(EXIT_ERROR)
    except MatrangeError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_ERROR)


if __name__ == "__main__":
    main()
