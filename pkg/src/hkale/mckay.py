"""Regular representation, isotypic decomposition and McKay data.

The irreducible content of the regular representation is obtained numerically:
a random Hermitian element of the group-algebra center is assembled from class
sums and eigen-split, so each eigenvalue cluster is one isotypic component
with multiplicity n_i**2.  No symbolic character-table machinery is needed;
the class function must carry an imaginary part or complex-conjugate pairs of
irreducibles would share every eigenvalue and never separate.

Graph adjacency comes from character inner products against the defining
2-dim representation, rounded to integers with a hard residual threshold;
the resulting diagram is matched against stored affine ADE templates.
"""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx
import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .groups import FiniteSubgroup

__all__ = [
    "RegularRep",
    "IsotypicDecomposition",
    "McKayData",
    "DecompositionFailed",
    "NotADE",
    "regular_representation",
    "isotypic_decompose",
    "mckay_graph",
    "enumerate_roots",
    "isotypic_projectors",
    "affine_template",
    "ROOT_COUNTS",
]


class DecompositionFailed(RuntimeError):
    """Eigen-split of the commutant center is inconsistent with sum n_i^2 = |G|."""


class NotADE(RuntimeError):
    """Computed adjacency matches no affine ADE template."""


@dataclass(frozen=True)
class RegularRep:
    """Left-translation permutation matrices on the ordered element list."""

    matrices: np.ndarray   # (n, n, n) float64 permutation matrices
    perm: np.ndarray       # (n, n) int, R(g) e_h = e_{perm[g, h]}

    @property
    def order(self) -> int:
        return self.matrices.shape[0]

    def character(self) -> np.ndarray:
        return np.trace(self.matrices, axis1=1, axis2=2)


def regular_representation(group: FiniteSubgroup) -> RegularRep:
    """R(g) acting by left translation: R(g) e_h = e_{gh}."""
    n = group.order
    mats = np.zeros((n, n, n))
    ar = np.arange(n)
    for g in range(n):
        mats[g, group.cayley[g, :], ar] = 1.0
    return RegularRep(matrices=mats, perm=group.cayley.copy())


@dataclass(frozen=True)
class IsotypicDecomposition:
    """Unitary change of basis splitting R into isotypic blocks.

    Block i spans columns ``slices[i]`` of ``basis`` and carries the i-th
    irreducible with multiplicity equal to its dimension ``marks[i]``; the
    trivial representation is block 0.
    """

    basis: np.ndarray                 # (n, n) complex unitary
    slices: tuple[slice, ...]
    marks: np.ndarray                 # (r+1,) int
    characters: np.ndarray            # (r+1, n_classes) complex
    recon_defect: float

    @property
    def n_irreps(self) -> int:
        return len(self.slices)


def _class_of(group: FiniteSubgroup) -> np.ndarray:
    cls = np.zeros(group.order, dtype=int)
    for ci, members in enumerate(group.conj_classes):
        for g in members:
            cls[g] = ci
    return cls


def _block_defect(basis: np.ndarray, slices, mats: np.ndarray) -> float:
    """Largest off-block magnitude of U* R(g) U over all g."""
    rot = np.einsum("ai,gab,bj->gij", np.conj(basis), mats, basis)
    mask = np.ones(basis.shape, dtype=bool)
    for s in slices:
        mask[s, s] = False
    return float(np.abs(rot[:, mask]).max()) if mask.any() else 0.0


def isotypic_decompose(group: FiniteSubgroup, rep: RegularRep,
                       tol: Tolerances = DEFAULT_TOL,
                       attempts: int = 8) -> IsotypicDecomposition:
    """Split the regular representation into isotypic components.

    A Hermitian center element sum_g f(g) R(g) is eigen-decomposed; its
    eigenvalue clusters are the components.  Draws are retried on a fixed
    seed ladder, so the output is deterministic across runs.
    """
    n = group.order
    cls_of = _class_of(group)
    n_cls = len(group.conj_classes)
    mats = rep.matrices.astype(complex)

    last_err = None
    for attempt in range(attempts):
        rng = np.random.default_rng((0xC0DE, attempt))
        f = rng.standard_normal(n_cls) + 1j * rng.standard_normal(n_cls)
        center = np.einsum("g,gij->ij", f[cls_of], mats)
        center = (center + center.conj().T) / 2.0
        try:
            return _split(group, mats, center, tol)
        except DecompositionFailed as err:
            last_err = err
    raise DecompositionFailed(f"no consistent split after {attempts} attempts: {last_err}")


def _split(group, mats, center, tol) -> IsotypicDecomposition:
    n = group.order
    evals, evecs = np.linalg.eigh(center)
    scale = max(1.0, float(np.abs(evals).max()))
    cuts = [0] + [t for t in range(1, n) if evals[t] - evals[t - 1] > tol.eig_cluster_gap * scale] + [n]
    blocks = [(cuts[s], cuts[s + 1]) for s in range(len(cuts) - 1)]

    mults = [hi - lo for lo, hi in blocks]
    marks = [int(round(np.sqrt(m))) for m in mults]
    if sum(mults) != n or any(m * m != mm for m, mm in zip(marks, mults)):
        raise DecompositionFailed(f"cluster multiplicities {mults} are not perfect squares summing to {n}")

    # characters on classes: chi_i(c) = Tr(P_i R(rep)) / n_i
    reps = [members[0] for members in group.conj_classes]
    chars = np.zeros((len(blocks), len(reps)), dtype=complex)
    for bi, (lo, hi) in enumerate(blocks):
        cols = evecs[:, lo:hi]
        for ci, g in enumerate(reps):
            chars[bi, ci] = np.einsum("ai,ab,bi->", np.conj(cols), mats[g], cols) / marks[bi]

    trivial = [i for i in range(len(blocks)) if np.abs(chars[i] - 1.0).max() < 1e-6]
    if len(trivial) != 1:
        raise DecompositionFailed("trivial representation not uniquely identified")

    # canonical block order: trivial first, then by (dimension, character values)
    def sort_key(i):
        rounded = np.round(chars[i].view(np.float64), 6) + 0.0   # kill -0.0
        return (marks[i], tuple(rounded.tolist()))

    order = trivial + sorted((i for i in range(len(blocks)) if i != trivial[0]), key=sort_key)

    cols, slices, at = [], [], 0
    for i in order:
        lo, hi = blocks[i]
        cols.append(evecs[:, lo:hi])
        slices.append(slice(at, at + hi - lo))
        at += hi - lo
    basis = np.concatenate(cols, axis=1)
    marks_arr = np.array([marks[i] for i in order], dtype=int)
    chars = chars[order]

    defect = _block_defect(basis, slices, mats)
    if defect > tol.isotypic_recon:
        raise DecompositionFailed(f"block reconstruction defect {defect:.2e}")

    return IsotypicDecomposition(basis=basis, slices=tuple(slices), marks=marks_arr,
                                 characters=chars, recon_defect=defect)


# ---------------------------------------------------------------------------
# affine ADE templates

ROOT_COUNTS = {
    "A": lambda r: r * (r + 1),
    "D": lambda r: 2 * r * (r - 1),
    "E": {6: 72, 7: 126, 8: 240},
}


def affine_template(label: str) -> tuple[np.ndarray, np.ndarray]:
    """(marks, adjacency) of an affine ADE diagram, node 0 the affine node.

    ``label`` is e.g. 'A~2', 'D~4', 'E~8'.  Adjacency stores edge multiplicity;
    the only multi-edge is A~1.
    """
    fam, r = label[0], int(label[2:])
    size = r + 1
    adj = np.zeros((size, size), dtype=int)
    if fam == "A":
        if r == 1:
            adj[0, 1] = adj[1, 0] = 2
            marks = np.array([1, 1])
        else:
            for i in range(size):
                adj[i, (i + 1) % size] = adj[(i + 1) % size, i] = 1
            marks = np.ones(size, dtype=int)
    elif fam == "D":
        if r < 4:
            raise ValueError("affine D needs rank >= 4")
        # spine 2..r-2, forks {0,1} at one end and {r-1, r} at the other
        spine = list(range(2, r - 1))
        edges = [(0, 2), (1, 2), (r - 2, r - 1), (r - 2, r)] + list(zip(spine, spine[1:]))
        for a, b in edges:
            adj[a, b] = adj[b, a] = 1
        marks = np.full(size, 2, dtype=int)
        marks[[0, 1, r - 1, r]] = 1
    elif fam == "E":
        if r == 6:
            # three arms of length 2 from the center node 2
            edges = [(0, 1), (1, 2), (2, 3), (3, 4), (2, 5), (5, 6)]
            marks = np.array([1, 2, 3, 2, 1, 2, 1])
        elif r == 7:
            edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (3, 7)]
            marks = np.array([1, 2, 3, 4, 3, 2, 1, 2])
        elif r == 8:
            edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (5, 8)]
            marks = np.array([1, 2, 3, 4, 5, 6, 4, 2, 3])
        else:
            raise ValueError("affine E rank must be 6, 7 or 8")
        for a, b in edges:
            adj[a, b] = adj[b, a] = 1
    else:
        raise ValueError(f"unknown family in label {label!r}")
    return marks, adj


def _as_graph(adj: np.ndarray, marks: np.ndarray) -> nx.Graph:
    g = nx.Graph()
    for i in range(adj.shape[0]):
        g.add_node(i, mark=int(marks[i]))
    for i in range(adj.shape[0]):
        for j in range(i + 1, adj.shape[0]):
            if adj[i, j]:
                g.add_edge(i, j, mult=int(adj[i, j]))
    return g


def _identify_affine_label(adj: np.ndarray, marks: np.ndarray) -> str:
    size = adj.shape[0]
    candidates = [f"A~{size - 1}"]
    if size >= 5:
        candidates.append(f"D~{size - 1}")
    if size in (7, 8, 9):
        candidates.append(f"E~{size - 1}")
    got = _as_graph(adj, marks)
    for label in candidates:
        tm, tadj = affine_template(label)
        if sorted(tm.tolist()) != sorted(np.asarray(marks).tolist()):
            continue
        want = _as_graph(tadj, tm)
        matcher = nx.algorithms.isomorphism.GraphMatcher(
            got, want,
            node_match=lambda a, b: a["mark"] == b["mark"],
            edge_match=lambda a, b: a["mult"] == b["mult"],
        )
        if matcher.is_isomorphic():
            return label
    raise NotADE(f"diagram with marks {np.asarray(marks).tolist()} matches no affine ADE template")


# ---------------------------------------------------------------------------
# McKay data

@dataclass(frozen=True)
class McKayData:
    """Marks, adjacency, Cartan matrices, root list and isotypic data."""

    marks: np.ndarray            # (r+1,) int, marks[0] = 1
    adjacency: np.ndarray        # (r+1, r+1) int
    cartan_ext: np.ndarray       # (r+1, r+1) int
    cartan: np.ndarray           # (r, r) int
    dynkin_label: str
    roots: np.ndarray            # (n_roots, r) int, simple-root coordinates
    isotypic: IsotypicDecomposition

    @property
    def rank(self) -> int:
        return self.marks.shape[0] - 1


def mckay_graph(group: FiniteSubgroup, rep: RegularRep | None = None,
                tol: Tolerances = DEFAULT_TOL) -> McKayData:
    """Adjacency a_ij as the multiplicity of irrep j inside Q tensor irrep i.

    a_ij = (1/|G|) sum_g chi_Q(g) chi_i(g) conj(chi_j(g)), rounded to the
    nearest integer; drift beyond the threshold aborts because these
    multiplicities are exact integers.
    """
    if rep is None:
        rep = regular_representation(group)
    iso = isotypic_decompose(group, rep, tol=tol)

    sizes = np.array([len(c) for c in group.conj_classes], dtype=float)
    reps = [c[0] for c in group.conj_classes]
    chi_q = np.array([np.trace(group.elements[g]).real for g in reps])

    r1 = iso.n_irreps
    raw = np.einsum("c,c,ic,jc->ij", sizes, chi_q.astype(complex),
                    iso.characters, np.conj(iso.characters)) / group.order
    if np.abs(raw.imag).max() > tol.mckay_integer:
        raise NotADE("adjacency has a non-real entry; decomposition failed upstream")
    adjacency = np.round(raw.real).astype(int)
    if np.abs(raw.real - adjacency).max() > tol.mckay_integer:
        raise NotADE("adjacency entries drift from integers beyond tolerance")
    if not np.array_equal(adjacency, adjacency.T) or np.any(np.diag(adjacency) != 0):
        raise NotADE("adjacency is not a loop-free symmetric multiplicity matrix")

    label = _identify_affine_label(adjacency, iso.marks)

    cartan_ext = 2 * np.eye(r1, dtype=int) - adjacency
    cartan = cartan_ext[1:, 1:]
    roots = enumerate_roots(cartan)

    return McKayData(marks=iso.marks, adjacency=adjacency, cartan_ext=cartan_ext,
                     cartan=cartan, dynkin_label=label, roots=roots, isotypic=iso)


def enumerate_roots(cartan: np.ndarray) -> np.ndarray:
    """All roots of a simply-laced system by reflection closure of the simple
    roots, as integer vectors in the simple-root basis, sorted lexicographically.

    s_i sends m to m with m_i replaced by m_i - sum_j C_ij m_j.
    """
    cartan = np.asarray(cartan, dtype=int)
    r = cartan.shape[0]
    seen = {tuple(row) for row in np.eye(r, dtype=int)}
    frontier = list(seen)
    while frontier:
        fresh = []
        for m in frontier:
            mv = np.array(m, dtype=int)
            pair = cartan @ mv
            for i in range(r):
                img = mv.copy()
                img[i] -= pair[i]
                t = tuple(img.tolist())
                if t not in seen:
                    seen.add(t)
                    fresh.append(t)
        frontier = fresh
    roots = np.array(sorted(seen), dtype=int)
    return roots


def isotypic_projectors(mckay: McKayData) -> np.ndarray:
    """Orthogonal projectors onto the isotypic components, original basis.

    These span the center of the commutant; trace of projector i is
    marks[i]**2.
    """
    iso = mckay.isotypic
    n = iso.basis.shape[0]
    out = np.zeros((iso.n_irreps, n, n), dtype=complex)
    for i, s in enumerate(iso.slices):
        cols = iso.basis[:, s]
        out[i] = cols @ cols.conj().T
    return out
