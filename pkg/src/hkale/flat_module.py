"""The flat quaternionic module of invariant matrix pairs.

A pair (alpha, beta) of endomorphisms of the regular representation is
*invariant* when conjugating by R(g) reproduces the linear action of the
defining 2x2 matrix on the pair.  The invariant pairs form a real vector
space of dimension 4|G| closed under the quaternion maps

    I(a, b) = (ia, ib),   J(a, b) = (-b*, a*),   K = I o J,

and under conjugation by unitaries commuting with the group.

The basis of the invariant space is built blockwise from the isotypic
decomposition: inside each pair of isotypic components the group-averaging
projector is applied to random vectors and the range orthonormalized.  This
sidesteps the dense ambient space (2|G|^2 complex dimensions, ~28800 for the
largest group) which a direct null-space solve could not handle; the dense
averaging projector is kept only as a small-group cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOL, Tolerances, construction_rng
from .groups import FiniteSubgroup
from .mckay import McKayData, RegularRep, isotypic_projectors

__all__ = [
    "MatrixPair",
    "InvariantBasis",
    "GaugeAlgebra",
    "DimensionMismatch",
    "NotInF",
    "NotInvariant",
    "pair_inner",
    "pair_norm",
    "quaternion_I",
    "quaternion_J",
    "quaternion_K",
    "membership_defect",
    "require_invariant",
    "invariant_basis",
    "dense_invariance_rank",
    "gauge_algebra",
    "f_action",
    "orbit_directions",
]


class DimensionMismatch(RuntimeError):
    """Constructed invariant space has the wrong dimension."""


class NotInF(ValueError):
    """Matrix does not commute with the group action (or is not unitary)."""


class NotInvariant(ValueError):
    """Pair fails the invariance equations beyond tolerance."""


@dataclass
class MatrixPair:
    """A pair (alpha, beta) of |G| x |G| complex matrices."""

    alpha: np.ndarray
    beta: np.ndarray

    def copy(self) -> "MatrixPair":
        return MatrixPair(self.alpha.copy(), self.beta.copy())

    def __add__(self, other: "MatrixPair") -> "MatrixPair":
        return MatrixPair(self.alpha + other.alpha, self.beta + other.beta)

    def __sub__(self, other: "MatrixPair") -> "MatrixPair":
        return MatrixPair(self.alpha - other.alpha, self.beta - other.beta)

    def __mul__(self, s) -> "MatrixPair":
        return MatrixPair(s * self.alpha, s * self.beta)

    __rmul__ = __mul__

    def __neg__(self) -> "MatrixPair":
        return MatrixPair(-self.alpha, -self.beta)

    @classmethod
    def zero(cls, n: int) -> "MatrixPair":
        return cls(np.zeros((n, n), dtype=complex), np.zeros((n, n), dtype=complex))


def pair_inner(p: MatrixPair, q: MatrixPair) -> complex:
    """Hermitian pairing Tr(a1 a2*) + Tr(b1 b2*), antilinear in the second slot."""
    return complex(np.sum(p.alpha * np.conj(q.alpha)) + np.sum(p.beta * np.conj(q.beta)))


def pair_norm(p: MatrixPair) -> float:
    return float(np.sqrt(max(pair_inner(p, p).real, 0.0)))


def quaternion_I(p: MatrixPair) -> MatrixPair:
    return MatrixPair(1j * p.alpha, 1j * p.beta)


def quaternion_J(p: MatrixPair) -> MatrixPair:
    return MatrixPair(-p.beta.conj().T, p.alpha.conj().T)


def quaternion_K(p: MatrixPair) -> MatrixPair:
    # K = I o J
    return MatrixPair(-1j * p.beta.conj().T, 1j * p.alpha.conj().T)


def membership_defect(p: MatrixPair, group: FiniteSubgroup, rep: RegularRep,
                      generators_only: bool = False) -> float:
    """Largest residual of the invariance equations.

    The set of group elements satisfying the equations at a fixed pair is a
    subgroup, so checking generators would suffice; the full sweep is kept as
    the reference definition and generator mode as the fast path.
    """
    n = group.order
    idx = range(1, min(n, 1 + group.n_generators)) if generators_only else range(n)
    worst = 0.0
    for g in idx:
        u, v = group.uv(g)
        rg = rep.matrices[g]
        rgi = rep.matrices[group.inverse[g]]
        worst = max(worst, float(np.abs(rgi @ p.alpha @ rg - (u * p.alpha + v * p.beta)).max()))
        worst = max(worst, float(np.abs(
            rgi @ p.beta @ rg - (-np.conj(v) * p.alpha + np.conj(u) * p.beta)).max()))
    return worst


def require_invariant(p: MatrixPair, group: FiniteSubgroup, rep: RegularRep,
                      tol: Tolerances = DEFAULT_TOL) -> None:
    scale = max(1.0, float(np.abs(p.alpha).max()), float(np.abs(p.beta).max()))
    defect = membership_defect(p, group, rep)
    if defect > tol.membership * scale:
        raise NotInvariant(f"invariance defect {defect:.3e} exceeds tolerance")


@dataclass
class InvariantBasis:
    """Real-orthonormal basis of the invariant pair space.

    ``alphas[j], betas[j]`` is the j-th basis pair; there are exactly 4|G| of
    them, orthonormal under Re of the hermitian pairing.  The stack is built
    as (e, ie) pairs over a unitary complex basis, which makes real
    orthonormality automatic.
    """

    alphas: np.ndarray   # (d, n, n) complex
    betas: np.ndarray
    ambient_dim: int     # complex dimension of the ambient pair space, 2 |G|^2

    @property
    def dim(self) -> int:
        return self.alphas.shape[0]

    def pair(self, j: int) -> MatrixPair:
        return MatrixPair(self.alphas[j], self.betas[j])

    def assemble(self, coords: np.ndarray) -> MatrixPair:
        coords = np.asarray(coords, dtype=float)
        return MatrixPair(np.einsum("k,kij->ij", coords, self.alphas),
                          np.einsum("k,kij->ij", coords, self.betas))

    def coordinates(self, p: MatrixPair) -> np.ndarray:
        """Real coordinates of (the projection of) a pair in this basis."""
        return np.real(np.einsum("kij,ij->k", np.conj(self.alphas), p.alpha)
                       + np.einsum("kij,ij->k", np.conj(self.betas), p.beta))

    def gram_defect(self) -> float:
        flat = np.concatenate([self.alphas.reshape(self.dim, -1),
                               self.betas.reshape(self.dim, -1)], axis=1)
        gram = np.real(flat @ flat.conj().T)
        return float(np.abs(gram - np.eye(self.dim)).max())


def _isotypic_rep(rep: RegularRep, basis: np.ndarray) -> np.ndarray:
    """R(g) rotated into the isotypic basis, stacked over g."""
    return np.matmul(basis.conj().T[None, :, :],
                     np.matmul(rep.matrices.astype(complex), basis[None, :, :]))


def invariant_basis(group: FiniteSubgroup, rep: RegularRep, mckay: McKayData,
                    rng: np.random.Generator | None = None,
                    tol: Tolerances = DEFAULT_TOL) -> InvariantBasis:
    """Build the invariant basis blockwise from the isotypic decomposition.

    For each ordered component pair (i, j) with adjacency a_ij > 0, the
    averaging projector of the pair action is applied to a_ij n_i n_j + 8
    random block pairs; the SVD of the images yields an orthonormal complex
    basis of the expected rank.  Vectors are then rotated back to the
    original basis and doubled to (e, ie) real pairs.

    Raises DimensionMismatch unless the final count is exactly 4|G|.
    """
    if rng is None:
        rng = construction_rng()
    n = group.order
    iso = mckay.isotypic
    riso = _isotypic_rep(rep, iso.basis)
    uv = [group.uv(g) for g in range(n)]
    inv = group.inverse

    alphas, betas = [], []
    for i in range(iso.n_irreps):
        for j in range(iso.n_irreps):
            a_ij = int(mckay.adjacency[i, j])
            if a_ij == 0:
                continue
            si, sj = iso.slices[i], iso.slices[j]
            mi, mj = si.stop - si.start, sj.stop - sj.start
            target = a_ij * int(mckay.marks[i]) * int(mckay.marks[j])
            draws = target + 8
            av = rng.standard_normal((draws, mj, mi)) + 1j * rng.standard_normal((draws, mj, mi))
            bv = rng.standard_normal((draws, mj, mi)) + 1j * rng.standard_normal((draws, mj, mi))
            aacc = np.zeros_like(av)
            bacc = np.zeros_like(bv)
            for g in range(n):
                u, v = uv[g]
                dj = riso[inv[g], sj, sj]
                di = riso[g, si, si]
                ca = np.einsum("ab,kbc,cd->kad", dj, av, di)
                cb = np.einsum("ab,kbc,cd->kad", dj, bv, di)
                # inverse of (u v; -v* u*) acting on the pair
                aacc += np.conj(u) * ca - v * cb
                bacc += np.conj(v) * ca + u * cb
            aacc /= n
            bacc /= n

            cols = np.concatenate([aacc.reshape(draws, -1), bacc.reshape(draws, -1)], axis=1).T
            left, sv, _ = np.linalg.svd(cols, full_matrices=False)
            rank = int(np.sum(sv > tol.rank_cut * sv[0])) if sv[0] > 0 else 0
            if rank != target:
                raise DimensionMismatch(
                    f"block ({i},{j}) rank {rank}, expected {target}")
            for c in range(rank):
                vec = left[:, c]
                af = np.zeros((n, n), dtype=complex)
                bf = np.zeros((n, n), dtype=complex)
                af[sj, si] = vec[: mj * mi].reshape(mj, mi)
                bf[sj, si] = vec[mj * mi:].reshape(mj, mi)
                alphas.append(iso.basis @ af @ iso.basis.conj().T)
                betas.append(iso.basis @ bf @ iso.basis.conj().T)

    ca, cb = np.stack(alphas), np.stack(betas)
    if ca.shape[0] != 2 * n:
        raise DimensionMismatch(f"complex dimension {ca.shape[0]}, expected {2 * n}")
    out = InvariantBasis(alphas=np.concatenate([ca, 1j * ca]),
                         betas=np.concatenate([cb, 1j * cb]),
                         ambient_dim=2 * n * n)
    if out.dim != 4 * n:
        raise DimensionMismatch(f"real dimension {out.dim}, expected {4 * n}")
    return out


_DENSE_CAP = 32


def dense_invariance_rank(group: FiniteSubgroup, rep: RegularRep) -> int:
    """Complex rank of the dense group-averaging projector on pair space.

    Cross-check for small groups only; the ambient dimension grows as
    2|G|^2 and is capped hard.
    """
    n = group.order
    if n > _DENSE_CAP:
        raise ValueError(f"dense projector limited to |G| <= {_DENSE_CAP}")
    nn = n * n
    proj = np.zeros((2 * nn, 2 * nn), dtype=complex)
    for g in range(n):
        u, v = group.uv(g)
        rg = rep.matrices[g].astype(complex)
        rgi = rep.matrices[group.inverse[g]].astype(complex)
        sandwich = np.kron(rg.T, rgi)     # vec(Rgi X Rg) = (Rg^T kron Rgi) vec(X)
        proj[:nn, :nn] += np.conj(u) * sandwich
        proj[:nn, nn:] += -v * sandwich
        proj[nn:, :nn] += np.conj(v) * sandwich
        proj[nn:, nn:] += u * sandwich
    proj /= n
    evals = np.linalg.eigvalsh((proj + proj.conj().T) / 2)
    return int(np.sum(evals > 0.5))


@dataclass
class GaugeAlgebra:
    """Anti-Hermitian matrices commuting with the group action.

    ``f_basis`` spans the full commutant algebra (dim |G|), ``ft_basis`` its
    trace-free part (dim |G| - 1), both orthonormal under Re Tr(A B*).
    ``projectors`` are the isotypic projectors whose imaginary multiples span
    the center; ``z_basis`` is a trace-projected spanning set of that center.
    """

    f_basis: np.ndarray      # (|G|, n, n) complex
    ft_basis: np.ndarray     # (|G|-1, n, n)
    projectors: np.ndarray   # (r+1, n, n)
    z_basis: np.ndarray      # (r, n, n)
    marks: np.ndarray

    @property
    def dim_f(self) -> int:
        return self.f_basis.shape[0]

    @property
    def dim_ft(self) -> int:
        return self.ft_basis.shape[0]

    def ft_coordinates(self, x: np.ndarray) -> np.ndarray:
        """Coordinates of a commuting traceless matrix against ft_basis."""
        return np.real(np.einsum("kij,ij->k", np.conj(self.ft_basis), x))


def _orthonormal_rows(mats: np.ndarray, rank_cut: float) -> tuple[np.ndarray, int]:
    """Orthonormalize a stack of matrices under Re Tr(A B*) via a real SVD."""
    count, n, _ = mats.shape
    flat = mats.reshape(count, -1)
    real = np.concatenate([flat.real, flat.imag], axis=1)
    left, sv, _ = np.linalg.svd(real.T, full_matrices=False)
    rank = int(np.sum(sv > rank_cut * sv[0])) if sv.size and sv[0] > 0 else 0
    half = flat.shape[1]
    out = (left[:half, :rank] + 1j * left[half:, :rank]).T.reshape(rank, n, n)
    return out, rank


def gauge_algebra(group: FiniteSubgroup, rep: RegularRep, mckay: McKayData,
                  rng: np.random.Generator | None = None,
                  tol: Tolerances = DEFAULT_TOL) -> GaugeAlgebra:
    """Commutant of the regular representation, blockwise.

    Within each isotypic block the averaging map X -> mean_g D(g^-1) X D(g)
    is applied to random matrices; the anti-Hermitian parts of the range are
    orthonormalized to n_i^2 real directions per block.
    """
    if rng is None:
        rng = construction_rng()
    n = group.order
    iso = mckay.isotypic
    riso = _isotypic_rep(rep, iso.basis)

    pieces = []
    for i, si in enumerate(iso.slices):
        mi = si.stop - si.start
        want = int(mckay.marks[i]) ** 2
        draws = want + 4
        x = rng.standard_normal((draws, mi, mi)) + 1j * rng.standard_normal((draws, mi, mi))
        acc = np.zeros_like(x)
        for g in range(n):
            d = riso[g, si, si]
            dinv = riso[group.inverse[g], si, si]
            acc += np.einsum("ab,kbc,cd->kad", dinv, x, d)
        acc /= n
        adj = np.conj(np.swapaxes(acc, 1, 2))
        cand = np.concatenate([(acc - adj) / 2.0, 1j * (acc + adj) / 2.0])
        ortho, rank = _orthonormal_rows(cand, tol.rank_cut)
        if rank != want:
            raise DimensionMismatch(f"commutant block {i}: rank {rank}, expected {want}")
        full = np.zeros((rank, n, n), dtype=complex)
        full[:, si, si] = ortho
        pieces.append(np.einsum("ab,kbc,dc->kad", iso.basis, full, np.conj(iso.basis)))

    f_basis = np.concatenate(pieces)
    if f_basis.shape[0] != n:
        raise DimensionMismatch(f"dim f = {f_basis.shape[0]}, expected {n}")

    # trace-free part: project out the anti-Hermitian identity direction
    iden = 1j * np.eye(n) / np.sqrt(n)
    coeff = np.real(np.einsum("kij,ij->k", f_basis, np.conj(iden)))
    ft_cand = f_basis - coeff[:, None, None] * iden
    ft_basis, rank = _orthonormal_rows(ft_cand, tol.rank_cut)
    if rank != n - 1:
        raise DimensionMismatch(f"dim f/t = {rank}, expected {n - 1}")

    projectors = isotypic_projectors(mckay)
    marks = mckay.marks.astype(int)
    z_basis = np.stack([
        1j * (projectors[i] - (marks[i] ** 2 / n) * np.eye(n))
        for i in range(1, len(marks))
    ]) if len(marks) > 1 else np.zeros((0, n, n), dtype=complex)

    return GaugeAlgebra(f_basis=f_basis, ft_basis=ft_basis,
                        projectors=projectors, z_basis=z_basis, marks=marks)


def f_action(f: np.ndarray, p: MatrixPair, group: FiniteSubgroup | None = None,
             rep: RegularRep | None = None, tol: Tolerances = DEFAULT_TOL) -> MatrixPair:
    """Conjugate a pair by a unitary f commuting with the group action.

    If the group is supplied, f is checked to be unitary and to commute with
    every R(g); failure raises NotInF.
    """
    if group is not None and rep is not None:
        if np.abs(f @ f.conj().T - np.eye(f.shape[0])).max() > 1e2 * tol.commutant:
            raise NotInF("f is not unitary")
        worst = max(float(np.abs(f @ rep.matrices[g] - rep.matrices[g] @ f).max())
                    for g in range(group.order))
        if worst > tol.commutant * max(1.0, float(np.abs(f).max())):
            raise NotInF(f"f fails to commute with the group action ({worst:.2e})")
    finv = f.conj().T
    return MatrixPair(f @ p.alpha @ finv, f @ p.beta @ finv)


def orbit_directions(p: MatrixPair, alg: GaugeAlgebra) -> list[MatrixPair]:
    """Tangent vectors of the conjugation orbit at p, one per ft_basis element."""
    out = []
    for y in alg.ft_basis:
        out.append(MatrixPair(y @ p.alpha - p.alpha @ y, y @ p.beta - p.beta @ y))
    return out
