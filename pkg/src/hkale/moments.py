"""Moment maps on the invariant pair space, level parameters and root walls.

The three moment maps of the conjugation action are

    m1(a, b) = (i/2) ([a, a*] + [b, b*])
    m2(a, b) = (1/2) ([a, b] + [a*, b*])
    m3(a, b) = (i/2) (-[a, b] + [a*, b*])

each an anti-Hermitian traceless matrix commuting with the group action.
Level parameters live in the center of the commutant, i.e. real combinations
of i times the isotypic projectors with the pure-trace direction removed.

The dual pairing used everywhere is <Y1, Y2> = Re Tr(Y1 Y2*); level sets,
residuals and Jacobians are all expressed against the orthonormal trace-free
commutant basis, so coordinate norms equal Frobenius norms exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .flat_module import GaugeAlgebra, InvariantBasis, MatrixPair, require_invariant
from .groups import FiniteSubgroup
from .mckay import McKayData, RegularRep

__all__ = [
    "MomentValue",
    "Zeta",
    "CartanImage",
    "GoodSetVerdict",
    "moment",
    "moment_stack",
    "moment_jacobian",
    "make_zeta",
    "random_good_zeta",
    "zeta_matrices",
    "zeta_to_cartan",
    "root_pairings",
    "is_good_zeta",
]


def _comm(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x @ y - y @ x


def _trace_project(x: np.ndarray) -> np.ndarray:
    n = x.shape[0]
    return x - (np.trace(x) / n) * np.eye(n)


@dataclass
class MomentValue:
    """The three moment map values at a pair; anti-Hermitian, traceless,
    commuting with the group action."""

    m1: np.ndarray
    m2: np.ndarray
    m3: np.ndarray

    def stack(self) -> np.ndarray:
        return np.stack([self.m1, self.m2, self.m3])


def moment_stack(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Raw (3, n, n) moment values, trace-projected, no membership check."""
    a_h, b_h = alpha.conj().T, beta.conj().T
    m1 = 0.5j * (_comm(alpha, a_h) + _comm(beta, b_h))
    m2 = 0.5 * (_comm(alpha, beta) + _comm(a_h, b_h))
    m3 = 0.5j * (-_comm(alpha, beta) + _comm(a_h, b_h))
    return np.stack([_trace_project(m) for m in (m1, m2, m3)])


def moment(p: MatrixPair, group: FiniteSubgroup | None = None,
           rep: RegularRep | None = None,
           tol: Tolerances = DEFAULT_TOL) -> MomentValue:
    """Evaluate the moment maps at an invariant pair.

    When the group is supplied the pair is first checked against the
    invariance equations (NotInvariant on failure).
    """
    if group is not None and rep is not None:
        require_invariant(p, group, rep, tol=tol)
    ms = moment_stack(p.alpha, p.beta)
    return MomentValue(m1=ms[0], m2=ms[1], m3=ms[2])


def _jacobian_stack(alpha, beta, da, db) -> np.ndarray:
    """Directional derivative of the moment stack at (alpha, beta) along (da, db)."""
    a_h, b_h = alpha.conj().T, beta.conj().T
    da_h, db_h = da.conj().T, db.conj().T
    d1 = 0.5j * (_comm(da, a_h) + _comm(alpha, da_h) + _comm(db, b_h) + _comm(beta, db_h))
    d2 = 0.5 * (_comm(da, beta) + _comm(alpha, db) + _comm(da_h, b_h) + _comm(a_h, db_h))
    d3 = 0.5j * (-_comm(da, beta) - _comm(alpha, db) + _comm(da_h, b_h) + _comm(a_h, db_h))
    return np.stack([d1, d2, d3])


def moment_jacobian(p: MatrixPair, basis: InvariantBasis, alg: GaugeAlgebra) -> np.ndarray:
    """Differential of the moment maps in basis coordinates.

    Returns the (3 (|G|-1)) x (4|G|) real matrix whose column j holds the
    ft-basis coordinates of the derivative along basis pair j, stacked over
    the three components.  The moment maps are quadratic, so the analytic
    derivative is exact; finite differences are used only as a test oracle.
    """
    m = alg.dim_ft
    rows = np.zeros((3 * m, basis.dim))
    for j in range(basis.dim):
        ds = _jacobian_stack(p.alpha, p.beta, basis.alphas[j], basis.betas[j])
        for c in range(3):
            rows[c * m:(c + 1) * m, j] = alg.ft_coordinates(ds[c])
    return rows


# ---------------------------------------------------------------------------
# level parameters

@dataclass
class Zeta:
    """Level parameter: three center elements given by coefficients against
    i times the isotypic projectors.  Tracelessness requires
    sum_i coeffs[a, i] * marks[i]^2 = 0 for each component a."""

    coeffs: np.ndarray   # (3, r+1) real

    def validate(self, marks: np.ndarray, tol: float = 1e-9) -> None:
        w = np.asarray(marks, dtype=float) ** 2
        drift = np.abs(self.coeffs @ w).max()
        if drift > tol * max(1.0, np.abs(self.coeffs).max()):
            raise ValueError(f"zeta coefficients are not trace-free (drift {drift:.2e})")

    def scaled(self, s: float) -> "Zeta":
        return Zeta(coeffs=self.coeffs * s)


def make_zeta(coeffs, marks: np.ndarray, project: bool = True) -> Zeta:
    """Build a level parameter, optionally projecting out the trace direction.

    The trace direction in coefficient space is the all-ones vector (the
    identity is the sum of the projectors), so projection subtracts the
    weighted mean sum(c n^2) / |G| from each row.
    """
    coeffs = np.array(coeffs, dtype=float).reshape(3, -1)
    marks = np.asarray(marks, dtype=float)
    if coeffs.shape[1] != marks.shape[0]:
        raise ValueError("coefficient row length must match the number of irreps")
    if project:
        w = marks ** 2
        coeffs = coeffs - np.outer(coeffs @ w / w.sum(), np.ones_like(marks))
    z = Zeta(coeffs=coeffs)
    z.validate(marks)
    return z


def zeta_matrices(z: Zeta, alg: GaugeAlgebra) -> np.ndarray:
    """The (3, n, n) matrix triple sum_i c_ai * i * P_i, trace-projected."""
    raw = np.einsum("ak,kij->aij", z.coeffs, 1j * alg.projectors)
    return np.stack([_trace_project(m) for m in raw])


def random_good_zeta(mckay: McKayData, rng: np.random.Generator,
                     scale: float = 1.0, max_tries: int = 100,
                     tol: Tolerances = DEFAULT_TOL) -> Zeta:
    """Draw trace-free coefficients until the level avoids every root wall."""
    for _ in range(max_tries):
        z = make_zeta(scale * rng.standard_normal((3, mckay.rank + 1)), mckay.marks)
        if is_good_zeta(z, mckay, tol=tol).good:
            return z
    raise RuntimeError(f"no good level found in {max_tries} draws")


# ---------------------------------------------------------------------------
# Cartan image and root walls

@dataclass
class CartanImage:
    """Images of the three level components in simple-root coordinates."""

    vectors: np.ndarray   # (3, r) real


def zeta_to_cartan(z: Zeta, mckay: McKayData) -> CartanImage:
    """Send i P_i -> n_i xi_i and substitute xi_0 = -sum n_i xi_i.

    In simple-root coordinates component a maps to the vector with entries
    n_i (c_ai - c_a0), i = 1..r.
    """
    marks = mckay.marks.astype(float)
    c = z.coeffs
    vec = marks[None, 1:] * (c[:, 1:] - c[:, :1])
    return CartanImage(vectors=vec)


def root_pairings(z: Zeta, mckay: McKayData) -> np.ndarray:
    """(n_roots, 3) pairings of every root with the three Cartan images.

    The bilinear form on the root lattice is the Cartan matrix itself
    (simply laced normalization, every root has squared length 2).
    """
    img = zeta_to_cartan(z, mckay).vectors
    return mckay.roots.astype(float) @ mckay.cartan.astype(float) @ img.T


@dataclass
class GoodSetVerdict:
    good: bool
    witness: np.ndarray | None    # offending root in simple-root coordinates
    min_pairing: float            # min over roots of max over components
    scale: float

    def to_dict(self) -> dict:
        return {
            "good": bool(self.good),
            "witness": None if self.witness is None else [int(x) for x in self.witness],
            "min_pairing": float(self.min_pairing),
            "scale": float(self.scale),
        }


def is_good_zeta(z: Zeta, mckay: McKayData, tol: Tolerances = DEFAULT_TOL) -> GoodSetVerdict:
    """Decide whether the level avoids every root wall.

    A root is a wall witness when all three of its pairings vanish.  The
    vanishing threshold is relative to the largest pairing observed, which
    makes the verdict invariant under rescaling the level; the zero level is
    bad with the first root as witness.
    """
    pair = root_pairings(z, mckay)
    if pair.size == 0:
        return GoodSetVerdict(good=False, witness=None, min_pairing=0.0, scale=0.0)
    per_root = np.abs(pair).max(axis=1)
    scale = float(per_root.max())
    if scale == 0.0:
        return GoodSetVerdict(good=False, witness=mckay.roots[0].copy(),
                              min_pairing=0.0, scale=0.0)
    worst = int(np.argmin(per_root))
    good = bool(per_root[worst] > tol.good_zeta * scale)
    return GoodSetVerdict(good=good,
                          witness=None if good else mckay.roots[worst].copy(),
                          min_pairing=float(per_root[worst]), scale=scale)
