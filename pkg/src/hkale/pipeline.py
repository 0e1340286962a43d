"""End-to-end pipeline: group -> McKay -> basis -> level -> solve -> frame ->
metric -> section-space verification, with a machine-readable report.

Every numeric claim in the report carries its value, the tolerance it was held
to, and a pass flag.  Wall-clock timings are kept out of the report body so a
repeated run with the same seed serializes byte-identically.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import cache as cache_mod
from .config import DEFAULT_TOL, Tolerances, stage_rng
from .flat_module import (
    GaugeAlgebra,
    InvariantBasis,
    MatrixPair,
    dense_invariance_rank,
    gauge_algebra,
    invariant_basis,
    membership_defect,
    orbit_directions,
)
from .gauge_bridge import (
    build_sphere_sample,
    flat_forms,
    j_on_section,
    mu1_reduction_check,
    quadrature_forms,
    reduced_moment_integrands,
    section_from_pair,
)
from .groups import FiniteSubgroup, build_group, verify_group
from .mckay import ROOT_COUNTS, McKayData, RegularRep, regular_representation
from .moments import (
    Zeta,
    is_good_zeta,
    make_zeta,
    moment_jacobian,
    random_good_zeta,
)
from .solver import (
    MetricSample,
    SolverOptions,
    WrongDimension,
    discrete_stabilizer_probe,
    dmu_rank,
    horizontal_frame,
    metric_sample,
    solve_moment,
    stabilizer_check,
)

__all__ = [
    "PipelineConfig",
    "CheckRecord",
    "StageReport",
    "RunReport",
    "Context",
    "build_context",
    "run_pipeline",
    "emit_metric_csv",
    "load_metric_csv",
]


# ---------------------------------------------------------------------------
# configuration

@dataclass
class PipelineConfig:
    family: str = "A"
    k: int | None = 1
    seed: int = 0
    zeta_coeffs: list | None = None     # explicit 3 x (r+1) rows, or None for a random good draw
    zeta_scale: float = 1.0
    solver_max_iter: int = 500
    solver_damping: float = 1e-3
    sample_n: int = 1000
    sample_strategy: str = "design"
    cache_dir: str | None = None
    n_bridge_pairs: int = 4
    tolerance_overrides: dict = field(default_factory=dict)

    def tolerances(self) -> Tolerances:
        if not self.tolerance_overrides:
            return DEFAULT_TOL
        for name, value in self.tolerance_overrides.items():
            if not hasattr(DEFAULT_TOL, name):
                raise ValueError(f"unknown tolerance {name!r}")
            if not (float(value) > 0):
                raise ValueError(f"tolerance {name!r} must be positive")
        return dataclasses.replace(DEFAULT_TOL, **{k: float(v) for k, v in self.tolerance_overrides.items()})

    def solver_options(self) -> SolverOptions:
        return SolverOptions(max_iter=self.solver_max_iter, damping_init=self.solver_damping)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        allowed = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json_file(cls, path) -> "PipelineConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# ---------------------------------------------------------------------------
# report structure

@dataclass
class CheckRecord:
    name: str
    value: float
    tolerance: float
    passed: bool
    comparator: str = "<="

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "tolerance": self.tolerance,
                "comparator": self.comparator, "passed": self.passed}


def check_le(name: str, value: float, bound: float) -> CheckRecord:
    return CheckRecord(name, float(value), float(bound), bool(value <= bound), "<=")


def check_ge(name: str, value: float, bound: float) -> CheckRecord:
    return CheckRecord(name, float(value), float(bound), bool(value >= bound), ">=")


def check_eq(name: str, value: float, target: float) -> CheckRecord:
    return CheckRecord(name, float(value), float(target), bool(value == target), "==")


@dataclass
class StageReport:
    name: str
    status: str = "ok"                  # ok | failed | skipped
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status != "failed" and all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"name": self.name, "status": self.status,
                "checks": [c.to_dict() for c in self.checks], "data": self.data}


@dataclass
class RunReport:
    config: dict
    stages: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.stages)

    def body(self) -> dict:
        return {"config": self.config, "passed": self.passed,
                "stages": [s.to_dict() for s in self.stages]}

    def body_json(self) -> str:
        """Deterministic serialization of everything except timings."""
        return json.dumps(self.body(), sort_keys=True)

    def to_json(self) -> str:
        full = self.body()
        full["timings"] = self.timings
        return json.dumps(full, sort_keys=True, indent=2)


# ---------------------------------------------------------------------------
# shared context

@dataclass
class Context:
    group: FiniteSubgroup
    rep: RegularRep
    mckay: McKayData
    basis: InvariantBasis
    algebra: GaugeAlgebra


def build_context(family: str, k: int | None = None, cache_dir=None,
                  tol: Tolerances = DEFAULT_TOL) -> Context:
    """Assemble (and optionally cache) everything downstream stages need.

    Construction randomness is pinned internally, so cached artifacts are
    pure functions of (family, k) and a cold rebuild reproduces them exactly.
    """
    from .mckay import mckay_graph

    group = cache_mod.load_group(family, k, cache_dir) if cache_dir else None
    if group is None:
        group = build_group(family, k, tol=tol)
        if cache_dir:
            cache_mod.save_group(group, cache_dir)
    key = cache_mod.cache_key(family, k)

    rep = regular_representation(group)

    mckay = cache_mod.load_mckay(key, cache_dir) if cache_dir else None
    if mckay is None:
        mckay = mckay_graph(group, rep, tol=tol)
        if cache_dir:
            cache_mod.save_mckay(mckay, key, cache_dir)

    basis = cache_mod.load_basis(key, cache_dir) if cache_dir else None
    if basis is None:
        basis = invariant_basis(group, rep, mckay, tol=tol)
        if cache_dir:
            cache_mod.save_basis(basis, key, cache_dir, group.order)

    algebra = gauge_algebra(group, rep, mckay, tol=tol)
    return Context(group=group, rep=rep, mckay=mckay, basis=basis, algebra=algebra)


# ---------------------------------------------------------------------------
# stages

def _expected_root_count(label: str) -> int:
    fam, r = label[0], int(label[2:])
    if fam == "A":
        return ROOT_COUNTS["A"](r)
    if fam == "D":
        return ROOT_COUNTS["D"](r)
    return ROOT_COUNTS["E"][r]


def _stage_group(ctx: Context, tol: Tolerances) -> StageReport:
    report = verify_group(ctx.group, tol=tol)
    stage = StageReport(name="group")
    for name, rec in report.checks.items():
        stage.checks.append(CheckRecord(name, rec["value"], rec["tolerance"], rec["ok"]))
    stage.data = {"label": ctx.group.label, "order": ctx.group.order,
                  "n_conj_classes": report.n_conj_classes,
                  "has_minus_id": ctx.group.has_minus_id}
    return stage


def _stage_mckay(ctx: Context, tol: Tolerances) -> StageReport:
    mk = ctx.mckay
    n = ctx.group.order
    stage = StageReport(name="mckay")
    marks = mk.marks.astype(int)
    stage.checks.append(check_eq("sum_marks_sq", int((marks ** 2).sum()), n))
    stage.checks.append(check_eq("cartan_null_vector", int(np.abs(mk.cartan_ext @ marks).max()), 0))
    stage.checks.append(check_eq("tensor_dim_identity", int(np.abs(mk.adjacency @ marks - 2 * marks).max()), 0))
    stage.checks.append(check_eq("root_count", mk.roots.shape[0], _expected_root_count(mk.dynkin_label)))
    gram = mk.roots @ mk.cartan @ mk.roots.T
    stage.checks.append(check_eq("root_norms", int(np.abs(np.diag(gram) - 2).max()), 0))
    stage.checks.append(check_le("isotypic_recon_defect", mk.isotypic.recon_defect, tol.isotypic_recon))
    stage.data = {"marks": marks.tolist(), "dynkin_label": mk.dynkin_label,
                  "adjacency": mk.adjacency.tolist(), "n_roots": int(mk.roots.shape[0])}
    return stage


def _stage_basis(ctx: Context, tol: Tolerances) -> StageReport:
    stage = StageReport(name="basis")
    n = ctx.group.order
    basis = ctx.basis
    stage.checks.append(check_eq("dim", basis.dim, 4 * n))
    worst = max(membership_defect(basis.pair(j), ctx.group, ctx.rep, generators_only=True)
                for j in range(basis.dim))
    stage.checks.append(check_le("membership_defect", worst, tol.membership))
    stage.checks.append(check_le("gram_defect", basis.gram_defect(), tol.orthonormal))
    if n <= 24:
        rank = dense_invariance_rank(ctx.group, ctx.rep)
        stage.checks.append(check_eq("dense_projector_rank", 2 * rank, 4 * n))
    stage.checks.append(check_eq("algebra_dim_f", ctx.algebra.dim_f, n))
    stage.checks.append(check_eq("algebra_dim_ft", ctx.algebra.dim_ft, n - 1))
    stage.data = {"ambient_dim": basis.ambient_dim}
    return stage


def _stage_goodness(ctx: Context, zeta: Zeta, tol: Tolerances):
    verdict = is_good_zeta(zeta, ctx.mckay, tol=tol)
    stage = StageReport(name="goodness")
    stage.checks.append(CheckRecord("zeta_good", 1.0 if verdict.good else 0.0, 1.0,
                                    verdict.good, "=="))
    stage.data = {"zeta_coeffs": zeta.coeffs.tolist(), **verdict.to_dict()}
    return stage, verdict


def _stage_solve(ctx: Context, zeta: Zeta, cfg: PipelineConfig, verdict,
                 tol: Tolerances):
    stage = StageReport(name="solve")
    good = verdict.good
    result = solve_moment(zeta, ctx.basis, ctx.algebra,
                          seed=stage_rng(cfg.seed, "solver_seed"),
                          options=cfg.solver_options(), tol=tol,
                          goodness=verdict)
    stage.checks.append(check_le("residual", result.residual, tol.solver_converged))
    stage.data = {"iterations": result.iterations, "converged": result.converged}
    if good:
        rank = dmu_rank(result.point, ctx.basis, ctx.algebra, tol=tol)
        stage.checks.append(check_eq("dmu_rank", rank, 3 * (ctx.group.order - 1)))
        sv = stabilizer_check(result.point, ctx.algebra)
        stage.checks.append(check_ge("stabilizer_sv", sv, tol.stabilizer))
        probe = discrete_stabilizer_probe(result.point, ctx.algebra,
                                          stage_rng(cfg.seed, "probe"))
        stage.data["discrete_probe"] = float(probe)   # heuristic, not gated
    return stage, result


def _stage_frame(ctx: Context, result, good: bool, tol: Tolerances):
    if not good:
        return StageReport(name="frame", status="skipped",
                           data={"reason": "level sits on a root wall"}), None
    stage = StageReport(name="frame")
    try:
        frame = horizontal_frame(result.point, ctx.basis, ctx.algebra, tol=tol)
    except WrongDimension as err:
        stage.status = "failed"
        stage.data = {"error": str(err)}
        return stage, None
    stage.checks.append(check_eq("dimension", len(frame.vectors), 4))
    jac = moment_jacobian(result.point, ctx.basis, ctx.algebra)
    stage.checks.append(check_le("kernel_defect",
                                 float(np.abs(jac @ frame.coords.T).max()), tol.frame_kernel))
    overlap = 0.0
    for d in orbit_directions(result.point, ctx.algebra):
        overlap = max(overlap, float(np.abs(frame.coords @ ctx.basis.coordinates(d)).max()))
    stage.checks.append(check_le("orbit_overlap", overlap, tol.frame_orbit))
    return stage, frame


def _stage_metric(frame, good: bool, tol: Tolerances):
    if not good or frame is None:
        return StageReport(name="metric", status="skipped",
                           data={"reason": "no frame available"}), None
    stage = StageReport(name="metric")
    ms = metric_sample(frame, tol=tol)
    eye = np.eye(4)
    worst_sq = max(np.abs(ms.iq @ ms.iq + eye).max(),
                   np.abs(ms.jq @ ms.jq + eye).max(),
                   np.abs(ms.kq @ ms.kq + eye).max())
    stage.checks.append(check_le("square_minus_one", float(worst_sq), tol.quaternion_sample))
    stage.checks.append(check_le("ijk_product",
                                 float(np.abs(ms.iq @ ms.jq @ ms.kq + eye).max()),
                                 tol.quaternion_sample))
    compat = max(np.abs(q.T @ ms.gram @ q - ms.gram).max() for q in (ms.iq, ms.jq, ms.kq))
    stage.checks.append(check_le("metric_compatibility", float(compat), tol.quaternion_sample))
    stage.data = {"gram": ms.gram.tolist()}
    return stage, ms


def _stage_gauge(ctx: Context, cfg: PipelineConfig, tol: Tolerances) -> StageReport:
    stage = StageReport(name="gauge")
    sample = build_sphere_sample(cfg.sample_n, strategy=cfg.sample_strategy,
                                 seed=cfg.seed, tol=tol)
    stage.data["sample_size"] = sample.size
    stage.checks.append(check_le(
        "weight_normalization",
        float(abs(np.sum(sample.weights * np.abs(sample.points[:, 0]) ** 2) - 1.0)),
        tol.sample_normalization))

    rng = stage_rng(cfg.seed, "pairs")
    j_defect = 0.0
    constancy = 0.0
    closed2 = 0.0
    closed3 = 0.0
    mu1_defect = 0.0
    metric_defect = 0.0
    skew_defect = 0.0

    def unit_pair():
        x = rng.standard_normal(ctx.basis.dim)
        return ctx.basis.assemble(x / np.linalg.norm(x))

    for _ in range(cfg.n_bridge_pairs):
        p1 = unit_pair()
        p2 = unit_pair()
        s1 = section_from_pair(p1, sample)
        s2 = section_from_pair(p2, sample)

        jvals = j_on_section(s1)
        via_pair = section_from_pair(MatrixPair(-p1.beta.conj().T, p1.alpha.conj().T), sample)
        j_defect = max(j_defect, float(np.abs(jvals - via_pair.values).max()))

        red = reduced_moment_integrands(s1)
        constancy = max(constancy, red.m2_constancy, red.m3_constancy)
        closed2 = max(closed2, red.m2_defect_plus)
        closed3 = max(closed3, red.m3_defect_plus)
        mu1_defect = max(mu1_defect, mu1_reduction_check(s1).defect_minus)

        quad = quadrature_forms(s1, s2)
        flat = flat_forms(p1, p2)
        metric_defect = max(metric_defect, abs(quad.g_h - flat.g_h))
        skew_defect = max(skew_defect, abs(quadrature_forms(s2, s1).omega3 + quad.omega3))

    stage.checks.append(check_le("j_reduction", j_defect, tol.pointwise_identity))
    stage.checks.append(check_le("integrand_constancy", constancy, tol.integrand_identity))
    stage.checks.append(check_le("m2_closed_form", closed2, tol.integrand_identity))
    stage.checks.append(check_le("m3_closed_form", closed3, tol.integrand_identity))
    stage.checks.append(check_le("m1_closed_form", mu1_defect, tol.integrand_identity))
    stage.checks.append(check_le("metric_agreement", metric_defect, tol.metric_agreement))
    stage.checks.append(check_le("omega3_skew", skew_defect, tol.integrand_identity))
    return stage


# ---------------------------------------------------------------------------
# driver

def run_pipeline(cfg: PipelineConfig, metric_csv_path=None) -> RunReport:
    """Run all stages in order; bad levels skip the frame and metric stages."""
    tol = cfg.tolerances()
    report = RunReport(config=cfg.to_dict())
    clock = time.perf_counter

    t0 = clock()
    ctx = build_context(cfg.family, cfg.k, cache_dir=cfg.cache_dir, tol=tol)
    report.timings["context"] = clock() - t0

    for name, fn in (("group", _stage_group), ("mckay", _stage_mckay), ("basis", _stage_basis)):
        t0 = clock()
        report.stages.append(fn(ctx, tol))
        report.timings[name] = clock() - t0

    if cfg.zeta_coeffs is not None:
        zeta = make_zeta(np.asarray(cfg.zeta_coeffs, dtype=float), ctx.mckay.marks)
    else:
        zeta = random_good_zeta(ctx.mckay, stage_rng(cfg.seed, "zeta"),
                                scale=cfg.zeta_scale, tol=tol)

    t0 = clock()
    stage, verdict = _stage_goodness(ctx, zeta, tol)
    good = verdict.good
    report.stages.append(stage)
    report.timings["goodness"] = clock() - t0

    t0 = clock()
    stage, result = _stage_solve(ctx, zeta, cfg, verdict, tol)
    report.stages.append(stage)
    report.timings["solve"] = clock() - t0

    t0 = clock()
    stage, frame = _stage_frame(ctx, result, good, tol)
    report.stages.append(stage)
    report.timings["frame"] = clock() - t0

    t0 = clock()
    stage, ms = _stage_metric(frame, good, tol)
    report.stages.append(stage)
    if ms is not None and metric_csv_path is not None:
        emit_metric_csv(ms, metric_csv_path)
    report.timings["metric"] = clock() - t0

    t0 = clock()
    report.stages.append(_stage_gauge(ctx, cfg, tol))
    report.timings["gauge"] = clock() - t0

    return report


# ---------------------------------------------------------------------------
# metric CSV

_CSV_HEADER = ["name"] + [f"v{i}{j}" for i in range(4) for j in range(4)]


def emit_metric_csv(sample: MetricSample, path) -> None:
    """One CSV row per matrix: gram, Iq, Jq, Kq, 16 row-major value columns.

    Values are written with 17 significant digits so re-parsing reproduces
    the doubles exactly.
    """
    path = Path(path)
    if str(path) == "":
        raise ValueError("empty metric CSV path")
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_HEADER)
        for name, mat in sample.to_rows():
            writer.writerow([name] + [f"{x:.17g}" for x in np.asarray(mat).ravel()])


def load_metric_csv(path) -> MetricSample:
    rows = {}
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != _CSV_HEADER:
            raise ValueError(f"unexpected metric CSV header in {path}")
        for row in reader:
            rows[row[0]] = np.array([float(x) for x in row[1:]]).reshape(4, 4)
    return MetricSample(gram=rows["gram"], iq=rows["Iq"], jq=rows["Jq"], kq=rows["Kq"])
