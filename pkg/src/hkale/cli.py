"""Command-line front end.

Subcommands mirror the pipeline stages: ``group``, ``mckay``, ``basis``,
``zeta-check``, ``solve``, ``metric``, ``gauge-verify`` and ``run``.  Every
command prints a JSON document on stdout (and optionally writes it with
``--out``); the process exits 0 only when all enabled checks pass.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .cache import complex_from_json, complex_to_json
from .config import DEFAULT_TOL, stage_rng
from .flat_module import MatrixPair, membership_defect
from .gauge_bridge import (
    build_sphere_sample,
    flat_forms,
    j_on_section,
    mu1_reduction_check,
    quadrature_forms,
    reduced_moment_integrands,
    section_from_pair,
)
from .groups import build_group, verify_group
from .moments import is_good_zeta, make_zeta, random_good_zeta
from .pipeline import (
    PipelineConfig,
    build_context,
    emit_metric_csv,
    run_pipeline,
)
from .solver import horizontal_frame, metric_sample, solve_moment, stabilizer_check

__all__ = ["main", "build_parser"]


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text + "\n", encoding="utf-8")
    print(text)


def _family_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--family", required=True, choices=["A", "D", "E6", "E7", "E8"])
    sub.add_argument("--k", type=int, default=None, help="rank parameter for A/D families")


def _load_zeta(path: str, marks) -> "make_zeta":
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return make_zeta(np.asarray(data["coeffs"], dtype=float), marks)


def cmd_group(args) -> int:
    group = build_group(args.family, args.k)
    report = verify_group(group)
    _emit(report.to_dict(), args.out)
    return 0 if report.passed else 1


def cmd_mckay(args) -> int:
    ctx = build_context(args.family, args.k, cache_dir=args.cache_dir)
    mk = ctx.mckay
    payload = {
        "label": ctx.group.label,
        "marks": mk.marks.tolist(),
        "adjacency": mk.adjacency.tolist(),
        "dynkin_label": mk.dynkin_label,
        "root_count": int(mk.roots.shape[0]),
    }
    _emit(payload, args.out)
    return 0


def cmd_basis(args) -> int:
    ctx = build_context(args.family, args.k, cache_dir=args.cache_dir)
    n = ctx.group.order
    worst = max(membership_defect(ctx.basis.pair(j), ctx.group, ctx.rep, generators_only=True)
                for j in range(ctx.basis.dim))
    payload = {
        "label": ctx.group.label,
        "dim": ctx.basis.dim,
        "expected_dim": 4 * n,
        "ambient_dim": ctx.basis.ambient_dim,
        "membership_defect": worst,
        "gram_defect": ctx.basis.gram_defect(),
        "dim_f": ctx.algebra.dim_f,
        "dim_ft": ctx.algebra.dim_ft,
        "passed": bool(ctx.basis.dim == 4 * n
                       and worst <= DEFAULT_TOL.membership
                       and ctx.basis.gram_defect() <= DEFAULT_TOL.orthonormal),
    }
    _emit(payload, args.out)
    return 0 if payload["passed"] else 1


def cmd_zeta_check(args) -> int:
    ctx = build_context(args.family, args.k, cache_dir=args.cache_dir)
    zeta = _load_zeta(args.zeta, ctx.mckay.marks)
    verdict = is_good_zeta(zeta, ctx.mckay)
    payload = {"label": ctx.group.label, "zeta_coeffs": zeta.coeffs.tolist(),
               **verdict.to_dict()}
    _emit(payload, args.out)
    return 0 if verdict.good else 1


def cmd_solve(args) -> int:
    ctx = build_context(args.family, args.k, cache_dir=args.cache_dir)
    if args.zeta:
        zeta = _load_zeta(args.zeta, ctx.mckay.marks)
    else:
        zeta = random_good_zeta(ctx.mckay, stage_rng(args.seed, "zeta"))
    verdict = is_good_zeta(zeta, ctx.mckay)
    result = solve_moment(zeta, ctx.basis, ctx.algebra,
                          seed=stage_rng(args.seed, "solver_seed"), goodness=verdict)
    stab = stabilizer_check(result.point, ctx.algebra)
    payload = {
        "family": args.family, "k": args.k, "seed": args.seed,
        "zeta_coeffs": zeta.coeffs.tolist(),
        "zeta_good": verdict.good,
        "residual": result.residual,
        "iterations": result.iterations,
        "converged": result.converged,
        "stabilizer_sv": stab,
        "alpha": complex_to_json(result.point.alpha),
        "beta": complex_to_json(result.point.beta),
    }
    _emit(payload, args.out)
    return 0 if result.converged else 1


def cmd_metric(args) -> int:
    data = json.loads(Path(args.solution).read_text(encoding="utf-8"))
    ctx = build_context(data["family"], data["k"], cache_dir=args.cache_dir)
    point = MatrixPair(complex_from_json(data["alpha"]), complex_from_json(data["beta"]))
    frame = horizontal_frame(point, ctx.basis, ctx.algebra)
    ms = metric_sample(frame)
    emit_metric_csv(ms, args.out)
    eye = np.eye(4)
    payload = {
        "out": str(args.out),
        "frame_dim": len(frame.vectors),
        "gram_defect": float(np.abs(ms.gram - eye).max()),
        "quaternion_defect": float(max(
            np.abs(ms.iq @ ms.iq + eye).max(),
            np.abs(ms.jq @ ms.jq + eye).max(),
            np.abs(ms.kq @ ms.kq + eye).max(),
            np.abs(ms.iq @ ms.jq @ ms.kq + eye).max(),
        )),
    }
    print(json.dumps(payload, sort_keys=True, indent=2))
    return 0 if payload["quaternion_defect"] <= DEFAULT_TOL.quaternion_sample else 1


def cmd_gauge_verify(args) -> int:
    ctx = build_context(args.family, args.k, cache_dir=args.cache_dir)
    tol = DEFAULT_TOL
    sample = build_sphere_sample(args.n, strategy=args.strategy, seed=args.seed)
    rng = stage_rng(args.seed, "pairs")
    identities = []

    def record(name, value, bound):
        identities.append({"identity": name, "defect": float(value),
                           "tolerance": float(bound), "passed": bool(value <= bound)})

    norm_defect = abs(float(np.sum(sample.weights * np.abs(sample.points[:, 0]) ** 2)) - 1.0)
    record("weight_normalization", norm_defect, tol.sample_normalization)

    for trial in range(args.pairs):
        x = rng.standard_normal(ctx.basis.dim)
        y = rng.standard_normal(ctx.basis.dim)
        p1 = ctx.basis.assemble(x / np.linalg.norm(x))
        p2 = ctx.basis.assemble(y / np.linalg.norm(y))
        s1 = section_from_pair(p1, sample)
        s2 = section_from_pair(p2, sample)

        jvals = j_on_section(s1)
        via_pair = section_from_pair(MatrixPair(-p1.beta.conj().T, p1.alpha.conj().T), sample)
        record(f"j_reduction[{trial}]", np.abs(jvals - via_pair.values).max(),
               tol.pointwise_identity)

        red = reduced_moment_integrands(s1)
        record(f"m2_constancy[{trial}]", red.m2_constancy, tol.integrand_identity)
        record(f"m3_constancy[{trial}]", red.m3_constancy, tol.integrand_identity)
        record(f"m2_closed_form[{trial}]", red.m2_defect_plus, tol.integrand_identity)
        record(f"m3_closed_form[{trial}]", red.m3_defect_plus, tol.integrand_identity)
        record(f"m1_closed_form[{trial}]", mu1_reduction_check(s1).defect_minus,
               tol.integrand_identity)

        quad = quadrature_forms(s1, s2)
        flat = flat_forms(p1, p2)
        record(f"metric_agreement[{trial}]", abs(quad.g_h - flat.g_h), tol.metric_agreement)
        record(f"omega3_skew[{trial}]", abs(quadrature_forms(s2, s1).omega3 + quad.omega3),
               tol.integrand_identity)

    payload = {
        "label": ctx.group.label,
        "sample": {"n": sample.size, "strategy": sample.strategy, "seed": args.seed},
        "identities": identities,
        "passed": all(i["passed"] for i in identities),
    }
    _emit(payload, args.out)
    return 0 if payload["passed"] else 1


def cmd_run(args) -> int:
    if args.config:
        cfg = PipelineConfig.from_json_file(args.config)
        if args.cache_dir is not None:
            cfg.cache_dir = args.cache_dir
        if args.seed is not None:
            cfg.seed = args.seed
    else:
        cfg = PipelineConfig(family=args.family, k=args.k,
                             seed=args.seed if args.seed is not None else 0,
                             cache_dir=args.cache_dir)
        if args.zeta:
            cfg.zeta_coeffs = json.loads(Path(args.zeta).read_text(encoding="utf-8"))["coeffs"]
    report = run_pipeline(cfg, metric_csv_path=args.metric_csv)
    text = report.to_json()
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hkale",
        description="Construct hyperkahler quotients of invariant matrix pairs "
                    "for finite SU(2) subgroups and verify the section-space identities.",
    )
    parser.add_argument("--cache-dir", default=None, help="directory for group/McKay/basis caches")
    parser.add_argument("--seed", type=int, default=None, help="pipeline seed")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("group", help="build a group and verify its invariants")
    _family_args(p)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_group)

    p = sub.add_parser("mckay", help="marks, adjacency, diagram label, root count")
    _family_args(p)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_mckay)

    p = sub.add_parser("basis", help="invariant basis dimensions and verification summary")
    _family_args(p)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_basis)

    p = sub.add_parser("zeta-check", help="test a level parameter against the root walls")
    _family_args(p)
    p.add_argument("--zeta", required=True, help="JSON file with a 'coeffs' 3x(r+1) array")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_zeta_check)

    p = sub.add_parser("solve", help="solve the moment equations at a level")
    _family_args(p)
    p.add_argument("--zeta", default=None, help="level file; omitted draws a random good level")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("metric", help="horizontal frame and metric CSV from a solution file")
    p.add_argument("--solution", required=True)
    p.add_argument("--out", required=True, help="metric CSV path")
    p.set_defaults(fn=cmd_metric)

    p = sub.add_parser("gauge-verify", help="section-space identity checks by quadrature")
    _family_args(p)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--strategy", default="design", choices=["design", "random"])
    p.add_argument("--pairs", type=int, default=4)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_gauge_verify)

    p = sub.add_parser("run", help="full pipeline with a JSON report")
    p.add_argument("--config", default=None, help="PipelineConfig JSON file")
    p.add_argument("--family", default="A")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--zeta", default=None)
    p.add_argument("--metric-csv", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_run)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed is None and args.command in ("solve", "gauge-verify"):
        args.seed = 0
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
