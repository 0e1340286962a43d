"""Equivariant sections over the 3-sphere and quadrature verification.

An invariant pair (alpha, beta) determines the equivariant evaluation map
lambda(z1, z2) = z1 alpha + z2 beta on the unit sphere of C^2.  On a finite
point sample this module checks, at floating-point precision, the identities
tying the section picture back to the flat pair space:

  * the quaternion J acts on sections by w(p) = -lambda(J p)^* and reduces to
    the pair map (a, b) -> (-b*, a*);
  * the symplectic pairings and metric of the section space, evaluated by
    quadrature, reproduce the flat-space pairings of the defining pairs;
  * the commutator integrands that define the second and third reduced moment
    maps are pointwise constant and equal the flat moment maps (the level
    parameter flips sign between the two pictures, so both signed comparisons
    are reported);
  * the first-component integrand is not pointwise constant but integrates to
    the flat value once the sample is normalized.

Samples are built in quadruples {q, -q, Jq, -Jq}, optionally right-multiplied
across a whole group orbit.  Negation and J are exact floating-point
operations, so the sample is closed under both as a bit-exact permutation and
all index maps are combinatorial, never nearest-point lookups.  Antipodal
pairing with equal weights also makes every degree-one base moment integrate
exactly, which is what the reduction identities need; the quadrature therefore
carries no statistical error for these checks, only roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .flat_module import MatrixPair, require_invariant
from .groups import FiniteSubgroup
from .mckay import RegularRep
from .moments import moment_stack

__all__ = [
    "SphereSample",
    "SectionSample",
    "SampleMismatch",
    "FormValues",
    "ReducedMomentReport",
    "Mu1Report",
    "build_sphere_sample",
    "section_from_pair",
    "j_on_section",
    "quadrature_forms",
    "flat_forms",
    "reduced_moment_integrands",
    "mu1_reduction_check",
]


class SampleMismatch(ValueError):
    """Sections evaluated on different samples cannot be paired."""


# slot layout inside a quadruple: 0: q, 1: -q, 2: Jq, 3: -Jq
_J_SLOT = np.array([2, 3, 1, 0])      # J maps slot s to _J_SLOT[s]  (4-cycle)
_TAU_SLOT = np.array([2, 3, 0, 1])    # antipodal pairing, an involution
_MINUS_SLOT = np.array([1, 0, 3, 2])


def _jmap(z: np.ndarray) -> np.ndarray:
    """Quaternion J on points of C^2: (z1, z2) -> (-conj z2, conj z1).  Exact."""
    return np.stack([-np.conj(z[..., 1]), np.conj(z[..., 0])], axis=-1)


@dataclass
class SphereSample:
    """Weighted point sample on the unit sphere of C^2, closed under +-1 and J.

    ``tau_pairing`` is an index involution sending each point to a sample
    point over the antipodal base point; ``j_perm`` is the exact index
    permutation realizing J (a 4-cycle on each quadruple).  Weights are
    normalized so sum w |z1|^2 = 1, which makes the section metric agree with
    the flat pair metric with no extra constant.
    """

    points: np.ndarray        # (N, 2) complex
    weights: np.ndarray       # (N,) positive
    tau_pairing: np.ndarray   # (N,) int, involution
    j_perm: np.ndarray        # (N,) int
    minus_perm: np.ndarray    # (N,) int
    strategy: str
    seed: int | None
    group_label: str | None = None
    group_index: np.ndarray | None = None   # (N,) right-multiplier element index

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def right_mult_perm(self, group: FiniteSubgroup, g: int) -> np.ndarray:
        """Index permutation of right multiplication by group element g.

        Only available when the sample was built orbit-closed over the same
        group.
        """
        if self.group_index is None or self.group_label != group.label:
            raise ValueError("sample was not built closed under this group")
        n_g = group.order
        base = np.arange(self.size) // n_g
        return base * n_g + group.cayley[self.group_index, g]


def _fibonacci_base(count: int) -> np.ndarray:
    """Deterministic well-spread base points: Fibonacci lattice on the base
    sphere lifted through a fixed section of the fibration."""
    k = np.arange(count)
    golden = (1.0 + np.sqrt(5.0)) / 2.0
    cos_theta = 1.0 - 2.0 * (k + 0.5) / count
    phi = 2.0 * np.pi * ((k / golden) % 1.0)
    half = 0.5 * np.arccos(np.clip(cos_theta, -1.0, 1.0))
    z1 = np.cos(half)
    z2 = np.sin(half) * np.exp(1j * phi)
    return np.stack([z1.astype(complex), z2], axis=-1)


def build_sphere_sample(n: int, strategy: str = "random", seed: int | None = None,
                        group: FiniteSubgroup | None = None,
                        tol: Tolerances = DEFAULT_TOL) -> SphereSample:
    """Antipode- and J-closed quadrature sample with at least n points.

    Strategies: 'random' draws seeded uniform points on the sphere of C^2,
    'design' uses a deterministic Fibonacci spread.  Either way the degree-one
    base moments vanish exactly by the pairing symmetry; the strategies differ
    only in higher-moment discrepancy.  When a group is given, the sample is
    additionally closed under right multiplication by every element, so group
    relabeling tests are exact permutations too.
    """
    if n < 100:
        raise ValueError("fewer than 100 points makes a degenerate sample; use n >= 100")
    per_orbit = 4 * (group.order if group is not None else 1)
    n_seeds = -(-n // per_orbit)

    if strategy == "random":
        rng = np.random.default_rng(seed)
        raw = rng.standard_normal((n_seeds, 4))
        raw /= np.linalg.norm(raw, axis=1, keepdims=True)
        base = raw[:, :2] + 1j * raw[:, 2:]
    elif strategy == "design":
        base = _fibonacci_base(n_seeds)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")

    quads = np.stack([base, -base, _jmap(base), -_jmap(base)], axis=1)  # (s, 4, 2)

    if group is None:
        pts = quads.reshape(-1, 2)
        n_g = 1
        gidx = None
    else:
        n_g = group.order
        elems = group.elements
        # right action of gamma on row vectors
        pts = np.einsum("sqa,gab->sqgb", quads, elems).reshape(-1, 2)
        gidx = np.tile(np.arange(n_g), 4 * n_seeds)

    total = pts.shape[0]
    idx = np.arange(total).reshape(n_seeds, 4, n_g)
    j_perm = np.empty(total, dtype=int)
    tau = np.empty(total, dtype=int)
    minus = np.empty(total, dtype=int)
    for s in range(4):
        j_perm[idx[:, s, :]] = idx[:, _J_SLOT[s], :]
        tau[idx[:, s, :]] = idx[:, _TAU_SLOT[s], :]
        minus[idx[:, s, :]] = idx[:, _MINUS_SLOT[s], :]

    weights = np.full(total, 2.0 / total)
    weights /= np.sum(weights * np.abs(pts[:, 0]) ** 2)

    return SphereSample(points=pts, weights=weights, tau_pairing=tau, j_perm=j_perm,
                        minus_perm=minus, strategy=strategy, seed=seed,
                        group_label=None if group is None else group.label,
                        group_index=gidx)


@dataclass
class SectionSample:
    """Pointwise values of the section attached to an invariant pair."""

    pair: MatrixPair
    values: np.ndarray      # (N, n, n) complex
    sample: SphereSample


def section_from_pair(p: MatrixPair, sample: SphereSample,
                      group: FiniteSubgroup | None = None,
                      rep: RegularRep | None = None,
                      tol: Tolerances = DEFAULT_TOL) -> SectionSample:
    """Tabulate lambda(z1, z2) = z1 alpha + z2 beta over the sample."""
    if group is not None and rep is not None:
        require_invariant(p, group, rep, tol=tol)
    z = sample.points
    values = z[:, 0, None, None] * p.alpha + z[:, 1, None, None] * p.beta
    return SectionSample(pair=p, values=values, sample=sample)


def j_on_section(sec: SectionSample) -> np.ndarray:
    """Pointwise J action: w(p) = -lambda(J p)^*, from stored values only.

    The sample is J-closed as an exact permutation, so lambda(J p) is a
    lookup, not a re-evaluation; this keeps the comparison against the pair
    map (-b*, a*) an actual two-route check.
    """
    looked_up = sec.values[sec.sample.j_perm]
    return -np.conj(np.swapaxes(looked_up, -1, -2))


def _check_same_sample(*secs: SectionSample) -> SphereSample:
    sample = secs[0].sample
    for s in secs[1:]:
        if s.sample is not sample:
            raise SampleMismatch("sections live on different samples")
    return sample


def _pointwise_pairing(v1: np.ndarray, v2: np.ndarray) -> np.ndarray:
    """Tr(v1 v2*) at each sample point."""
    return np.einsum("ipq,ipq->i", v1, np.conj(v2))


@dataclass
class FormValues:
    omega1: float
    omega2: float
    omega3: float
    g_h: float

    def as_tuple(self):
        return (self.omega1, self.omega2, self.omega3, self.g_h)


def quadrature_forms(sec1: SectionSample, sec2: SectionSample) -> FormValues:
    """Quadrature values of the three symplectic pairings and the metric.

    omega1 and g_h pair the sections directly; omega2 and omega3 pair the
    J-image of the first section against the second.
    """
    sample = _check_same_sample(sec1, sec2)
    w = sample.weights
    direct = _pointwise_pairing(sec1.values, sec2.values)
    via_j = _pointwise_pairing(j_on_section(sec1), sec2.values)
    return FormValues(
        omega1=float(-np.sum(w * direct.imag)),
        omega2=float(np.sum(w * via_j.real)),
        omega3=float(-np.sum(w * via_j.imag)),
        g_h=float(np.sum(w * direct.real)),
    )


def flat_forms(p1: MatrixPair, p2: MatrixPair) -> FormValues:
    """Closed-form values of the four pairings on the flat pair space.

    Derived once from the quadrature definitions with the normalized sample
    moments (sum w |z1|^2 = sum w |z2|^2 = 1, cross moment 0) and used as the
    oracle side of the two-route checks.
    """
    direct = complex(np.sum(p1.alpha * np.conj(p2.alpha)) + np.sum(p1.beta * np.conj(p2.beta)))
    jfirst = MatrixPair(-p1.beta.conj().T, p1.alpha.conj().T)
    via_j = complex(np.sum(jfirst.alpha * np.conj(p2.alpha)) + np.sum(jfirst.beta * np.conj(p2.beta)))
    return FormValues(omega1=-direct.imag, omega2=via_j.real,
                      omega3=-via_j.imag, g_h=direct.real)


@dataclass
class ReducedMomentReport:
    """Pointwise commutator integrands of the two reduced moment maps.

    ``m2_mean`` and ``m3_mean`` are the weighted means; the constancy defects
    measure the largest pointwise deviation from the mean (analytically zero:
    the bilinear point dependence cancels inside the commutators).  Closed
    forms are the flat moment maps; both signed defects are recorded because
    the level parameter changes sign between the section and pair pictures.
    """

    m2_pointwise: np.ndarray
    m3_pointwise: np.ndarray
    m2_mean: np.ndarray
    m3_mean: np.ndarray
    m2_constancy: float
    m3_constancy: float
    m2_closed: np.ndarray
    m3_closed: np.ndarray
    m2_defect_plus: float
    m2_defect_minus: float
    m3_defect_plus: float
    m3_defect_minus: float


def reduced_moment_integrands(sec: SectionSample) -> ReducedMomentReport:
    """Evaluate the commutator integrands at every point and compare routes.

    Integrand conventions: with w = J-image values and v the section values,

        m2(p) = (1/2)  ([w, v*] - [v, w*])
        m3(p) = (i/2) ([w, v*] + [v, w*])

    which for a section built from a pair collapse pointwise to the flat
    m2 and m3 of that pair.
    """
    v = sec.values
    w = j_on_section(sec)
    v_h = np.conj(np.swapaxes(v, -1, -2))
    w_h = np.conj(np.swapaxes(w, -1, -2))
    c1 = w @ v_h - v_h @ w    # [J theta, theta*]
    c2 = v @ w_h - w_h @ v    # [theta, J theta*]
    m2_pt = 0.5 * (c1 - c2)
    m3_pt = 0.5j * (c1 + c2)

    wq = sec.sample.weights
    wsum = float(np.sum(wq))
    m2_mean = np.einsum("i,ipq->pq", wq, m2_pt) / wsum
    m3_mean = np.einsum("i,ipq->pq", wq, m3_pt) / wsum

    closed = moment_stack(sec.pair.alpha, sec.pair.beta)
    return ReducedMomentReport(
        m2_pointwise=m2_pt, m3_pointwise=m3_pt,
        m2_mean=m2_mean, m3_mean=m3_mean,
        m2_constancy=float(np.abs(m2_pt - m2_mean).max()),
        m3_constancy=float(np.abs(m3_pt - m3_mean).max()),
        m2_closed=closed[1], m3_closed=closed[2],
        m2_defect_plus=float(np.abs(m2_mean - closed[1]).max()),
        m2_defect_minus=float(np.abs(m2_mean + closed[1]).max()),
        m3_defect_plus=float(np.abs(m3_mean - closed[2]).max()),
        m3_defect_minus=float(np.abs(m3_mean + closed[2]).max()),
    )


@dataclass
class Mu1Report:
    """Weighted integral of the first-component integrand versus closed form.

    The integrand -(i/2) [v, v*] varies over the sample; its integral under
    the normalized weights equals minus the flat first moment map (the level
    sign convention again), so ``defect_minus`` is the matching branch.
    """

    integral: np.ndarray
    closed: np.ndarray
    defect_plus: float
    defect_minus: float


def mu1_reduction_check(sec: SectionSample) -> Mu1Report:
    v = sec.values
    v_h = np.conj(np.swapaxes(v, -1, -2))
    integrand = -0.5j * (v @ v_h - v_h @ v)
    integral = np.einsum("i,ipq->pq", sec.sample.weights, integrand)
    closed = moment_stack(sec.pair.alpha, sec.pair.beta)[0]
    return Mu1Report(
        integral=integral, closed=closed,
        defect_plus=float(np.abs(integral - closed).max()),
        defect_minus=float(np.abs(integral + closed).max()),
    )
