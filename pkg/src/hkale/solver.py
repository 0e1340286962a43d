"""Level-set solver and quotient-geometry samplers.

Solves the three moment map equations inside the invariant pair space by
Levenberg-Marquardt on the real basis coordinates.  The residual is the
stacked trace-free-commutant coordinate vector of (moment - level); because
the maps are quadratic, Gauss-Newton converges in a handful of iterations
near generic points and the damping only matters around the rank-deficient
origin.

At a converged point the quotient tangent space is the kernel of the moment
differential intersected with the orthogonal complement of the conjugation
orbit; both are assembled into one stacked matrix whose numerical null space
must be exactly 4-dimensional.  Quaternion maps are then compressed onto that
frame to sample the induced metric and complex structures.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .config import DEFAULT_TOL, Tolerances
from .flat_module import (
    GaugeAlgebra,
    InvariantBasis,
    MatrixPair,
    orbit_directions,
    pair_inner,
    pair_norm,
    quaternion_I,
    quaternion_J,
    quaternion_K,
)
from .moments import Zeta, moment_jacobian, moment_stack, zeta_matrices

logger = logging.getLogger(__name__)

__all__ = [
    "SolverOptions",
    "SolveResult",
    "HorizontalFrame",
    "MetricSample",
    "WrongDimension",
    "ProjectionDefect",
    "solve_moment",
    "stabilizer_check",
    "discrete_stabilizer_probe",
    "dmu_rank",
    "horizontal_frame",
    "metric_sample",
    "cone_defect_a1",
    "cone_oracle_a1",
]


class WrongDimension(RuntimeError):
    """Numerical kernel of the constraint stack is not 4-dimensional."""


class ProjectionDefect(RuntimeError):
    """A quaternion map failed to preserve the horizontal space."""


@dataclass(frozen=True)
class SolverOptions:
    max_iter: int = 500
    damping_init: float = 1e-3
    damping_down: float = 0.3
    damping_up: float = 3.0
    damping_cap: float = 1e14
    seed_scale: float = 0.5


@dataclass
class SolveResult:
    point: MatrixPair
    coords: np.ndarray
    residual: float          # Frobenius norm of (moment - level), re-evaluated
    iterations: int
    converged: bool

    def to_dict(self) -> dict:
        return {"residual": float(self.residual), "iterations": int(self.iterations),
                "converged": bool(self.converged)}


def _residual_coords(x, basis, alg, zmats):
    p = basis.assemble(x)
    ms = moment_stack(p.alpha, p.beta)
    return np.concatenate([alg.ft_coordinates(ms[a] - zmats[a]) for a in range(3)]), p


def _fresh_residual(p: MatrixPair, zmats: np.ndarray) -> float:
    ms = moment_stack(p.alpha, p.beta)
    return float(np.sqrt(sum(np.sum(np.abs(ms[a] - zmats[a]) ** 2) for a in range(3))))


def seed_coordinates(zmats: np.ndarray, basis: InvariantBasis,
                     rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    """Random start at the magnitude suggested by quadratic scaling.

    The moment maps are homogeneous of degree two, so a level of size s is
    matched by pairs of size sqrt(s).
    """
    size = float(np.linalg.norm(zmats))
    amp = scale * max(np.sqrt(size), 1e-3)
    x = rng.standard_normal(basis.dim)
    return amp * x / np.linalg.norm(x)


def solve_moment(zeta: Zeta, basis: InvariantBasis, alg: GaugeAlgebra,
                 seed=0, options: SolverOptions = SolverOptions(),
                 tol: Tolerances = DEFAULT_TOL,
                 goodness=None) -> SolveResult:
    """Levenberg-Marquardt on the stacked moment residual.

    ``seed`` may be an integer (RNG seed), a Generator, a coordinate vector,
    or a MatrixPair (projected into the invariant space through the basis).
    Deterministic given the seed.  A level known to sit on a root wall is
    allowed but logged, since the free-action certificate will fail there.
    """
    zmats = zeta_matrices(zeta, alg)
    if goodness is not None and not goodness.good:
        logger.warning("solving at a level on a root wall; the quotient is singular there")

    if isinstance(seed, MatrixPair):
        x = basis.coordinates(seed)
    elif isinstance(seed, np.ndarray) and seed.ndim == 1 and seed.shape[0] == basis.dim:
        x = seed.astype(float).copy()
    else:
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        x = seed_coordinates(zmats, basis, rng, scale=options.seed_scale)

    r, p = _residual_coords(x, basis, alg, zmats)
    lam = options.damping_init
    eye = np.eye(basis.dim)
    iterations = 0
    for iterations in range(1, options.max_iter + 1):
        nr = float(np.linalg.norm(r))
        if nr <= tol.solver_target:
            break
        jac = moment_jacobian(p, basis, alg)
        jtj = jac.T @ jac
        grad = jac.T @ r
        stalled = False
        while True:
            step = np.linalg.solve(jtj + lam * eye, -grad)
            rt, pt = _residual_coords(x + step, basis, alg, zmats)
            if np.linalg.norm(rt) < nr:
                x, r, p = x + step, rt, pt
                lam = max(lam * options.damping_down, 1e-15)
                break
            lam *= options.damping_up
            if lam > options.damping_cap:
                stalled = True
                break
        if stalled:
            break

    final = _fresh_residual(p, zmats)    # independent certificate, from scratch
    return SolveResult(point=p, coords=x, residual=final, iterations=iterations,
                       converged=bool(final <= tol.solver_converged))


# ---------------------------------------------------------------------------
# free-action certificates

def _orbit_matrix(p: MatrixPair, alg: GaugeAlgebra) -> np.ndarray:
    """Real matrix of Y -> ([Y, alpha], [Y, beta]) on the trace-free basis,
    columns flattened to real coordinates."""
    cols = []
    for d in orbit_directions(p, alg):
        flat = np.concatenate([d.alpha.ravel(), d.beta.ravel()])
        cols.append(np.concatenate([flat.real, flat.imag]))
    return np.stack(cols, axis=1)


def stabilizer_check(p: MatrixPair, alg: GaugeAlgebra) -> float:
    """Smallest singular value of the infinitesimal-action map.

    A value above threshold certifies a trivial Lie-algebra stabilizer;
    finite stabilizers are only probed stochastically (see
    discrete_stabilizer_probe).
    """
    mat = _orbit_matrix(p, alg)
    sv = np.linalg.svd(mat, compute_uv=False)
    return float(sv[-1]) if sv.size else 0.0


def discrete_stabilizer_probe(p: MatrixPair, alg: GaugeAlgebra,
                              rng: np.random.Generator, samples: int = 8) -> float:
    """Heuristic: smallest relative displacement of p under random commutant
    unitaries exp(Y).  Near-zero output flags a possible finite stabilizer."""
    scale = max(pair_norm(p), 1e-300)
    worst = np.inf
    for _ in range(samples):
        c = rng.standard_normal(alg.dim_ft)
        y = np.einsum("k,kij->ij", c / np.linalg.norm(c), alg.ft_basis)
        f = scipy.linalg.expm(y)
        moved = MatrixPair(f @ p.alpha @ f.conj().T, f @ p.beta @ f.conj().T)
        worst = min(worst, pair_norm(moved - p) / scale)
    return float(worst)


def dmu_rank(p: MatrixPair, basis: InvariantBasis, alg: GaugeAlgebra,
             tol: Tolerances = DEFAULT_TOL) -> int:
    """Numerical rank of the moment differential at p."""
    sv = np.linalg.svd(moment_jacobian(p, basis, alg), compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > tol.kernel_cut * sv[0]))


# ---------------------------------------------------------------------------
# horizontal frame and metric sampling

@dataclass
class HorizontalFrame:
    """Orthonormal basis of ker(dmu) intersect orbit-perp at a solution."""

    at: MatrixPair
    coords: np.ndarray              # (4, dim) real coordinates in the basis
    vectors: list = field(default_factory=list)   # four MatrixPairs


def horizontal_frame(p: MatrixPair, basis: InvariantBasis, alg: GaugeAlgebra,
                     tol: Tolerances = DEFAULT_TOL) -> HorizontalFrame:
    """Extract the 4-dimensional quotient tangent frame at a solution.

    The moment differential rows and the orbit-direction coordinate rows are
    stacked; right singular vectors below the relative cutoff span the
    horizontal space.  Raises WrongDimension unless exactly four survive
    (at the origin the stack vanishes and everything would pass the cut,
    which is reported as the same failure).
    """
    jac = moment_jacobian(p, basis, alg)
    orbit_rows = (np.stack([basis.coordinates(d) for d in orbit_directions(p, alg)])
                  if alg.dim_ft else np.zeros((0, basis.dim)))
    stackmat = np.vstack([jac, orbit_rows])
    u, sv, vt = np.linalg.svd(stackmat)
    if sv.size == 0 or sv[0] <= 0.0:
        raise WrongDimension("constraint stack vanishes; no well-defined frame here")
    keep = sv > tol.kernel_cut * sv[0]
    kernel_dim = basis.dim - int(np.sum(keep))
    if kernel_dim != 4:
        raise WrongDimension(f"horizontal space has dimension {kernel_dim}, expected 4")
    coords = vt[np.sum(keep):, :]
    frame = HorizontalFrame(at=p, coords=coords,
                            vectors=[basis.assemble(c) for c in coords])
    return frame


@dataclass
class MetricSample:
    """Flat metric and projected quaternion maps restricted to a frame."""

    gram: np.ndarray   # (4, 4) real
    iq: np.ndarray
    jq: np.ndarray
    kq: np.ndarray

    def to_rows(self) -> list:
        return [("gram", self.gram), ("Iq", self.iq), ("Jq", self.jq), ("Kq", self.kq)]


def metric_sample(frame: HorizontalFrame, tol: Tolerances = DEFAULT_TOL) -> MetricSample:
    """Compress the flat metric and I, J, K onto the frame span.

    The quaternion maps preserve the horizontal space at exact solutions, so
    the projection residual is a health check: beyond tolerance it raises
    ProjectionDefect rather than returning a silently broken sample.
    """
    vecs = frame.vectors
    m = len(vecs)
    gram = np.zeros((m, m))
    for a in range(m):
        for b in range(m):
            gram[a, b] = pair_inner(vecs[a], vecs[b]).real

    out = {}
    for name, qmap in (("iq", quaternion_I), ("jq", quaternion_J), ("kq", quaternion_K)):
        mat = np.zeros((m, m))
        images = [qmap(v) for v in vecs]
        for b, img in enumerate(images):
            for a in range(m):
                mat[a, b] = pair_inner(vecs[a], img).real
        for b, img in enumerate(images):
            recon = MatrixPair.zero(img.alpha.shape[0])
            for a in range(m):
                recon = recon + mat[a, b] * vecs[a]
            defect = pair_norm(img - recon)
            if defect > tol.projection_defect:
                raise ProjectionDefect(
                    f"{name} leaves the horizontal space by {defect:.2e}")
        out[name] = mat
    return MetricSample(gram=gram, iq=out["iq"], jq=out["jq"], kq=out["kq"])


# ---------------------------------------------------------------------------
# A1 cone relation

def cone_defect_a1(p: MatrixPair) -> float:
    """Defect of the trace relation tr(a^2) tr(b^2) = tr(ab)^2.

    On the zero level set of the order-2 cyclic group the invariant traces
    satisfy this identity exactly (the quotient is the quadric cone); away
    from the level set it fails at order one.
    """
    ta = np.trace(p.alpha @ p.alpha)
    tb = np.trace(p.beta @ p.beta)
    tab = np.trace(p.alpha @ p.beta)
    return float(abs(ta * tb - tab * tab))


def cone_oracle_a1(points) -> float:
    """Largest cone-relation defect over a batch of pairs."""
    return max(cone_defect_a1(p) for p in points)
