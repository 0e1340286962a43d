import numpy as np
import pytest

from hkale.groups import build_group
from hkale.mckay import (
    NotADE,
    _identify_affine_label,
    affine_template,
    enumerate_roots,
    isotypic_projectors,
    mckay_graph,
    regular_representation,
)


def root_enumeration_oracle(cartan, bound=4):
    """Independent oracle: exhaustive scan of integer vectors with norm^2 = 2
    under the Cartan Gram form."""
    cartan = np.asarray(cartan, dtype=int)
    r = cartan.shape[0]
    grids = np.meshgrid(*[np.arange(-bound, bound + 1)] * r, indexing="ij")
    vecs = np.stack([g.ravel() for g in grids], axis=1)
    norms = np.einsum("ki,ij,kj->k", vecs, cartan, vecs)
    return vecs[norms == 2]


def test_regular_rep_is_homomorphism():
    for family, k in [("A", 3), ("D", 2), ("E6", None)]:
        g = build_group(family, k)
        rep = regular_representation(g)
        rng = np.random.default_rng(2)
        for _ in range(20):
            i, j = rng.integers(0, g.order, size=2)
            lhs = rep.matrices[i] @ rep.matrices[j]
            assert np.array_equal(lhs, rep.matrices[g.cayley[i, j]])


def test_regular_rep_character():
    for family, k in [("A", 1), ("D", 3), ("E7", None)]:
        g = build_group(family, k)
        rep = regular_representation(g)
        chi = rep.character()
        assert chi[0] == g.order
        assert np.abs(chi[1:]).max() == 0


def test_a1_regular_rep_swap():
    g = build_group("A", 1)
    rep = regular_representation(g)
    assert np.array_equal(rep.matrices[1], np.array([[0.0, 1.0], [1.0, 0.0]]))


def test_d2_regular_rep_traceless_off_identity():
    g = build_group("D", 2)
    rep = regular_representation(g)
    for i in range(1, 8):
        assert np.trace(rep.matrices[i]) == 0
        # permutation matrix: one 1 per row/column
        assert np.array_equal(rep.matrices[i].sum(axis=0), np.ones(8))


MARKS = [
    ("A", 1, [1, 1], "A~1"),
    ("A", 2, [1, 1, 1], "A~2"),
    ("A", 3, [1, 1, 1, 1], "A~3"),
    ("D", 2, [1, 1, 1, 1, 2], "D~4"),
    ("D", 3, [1, 1, 1, 1, 2, 2], "D~5"),
    ("E6", None, [1, 1, 1, 2, 2, 2, 3], "E~6"),
]


@pytest.mark.parametrize("family,k,marks,label", MARKS)
def test_marks_and_labels(get_context, family, k, marks, label):
    ctx = get_context(family, k)
    assert sorted(ctx.mckay.marks.tolist()) == sorted(marks)
    assert ctx.mckay.marks[0] == 1
    assert ctx.mckay.dynkin_label == label
    assert int((ctx.mckay.marks ** 2).sum()) == ctx.group.order


def test_isotypic_reconstruction(get_context):
    for family, k in [("A", 2), ("D", 2), ("E6", None)]:
        ctx = get_context(family, k)
        iso = ctx.mckay.isotypic
        u = iso.basis
        assert np.abs(u @ u.conj().T - np.eye(ctx.group.order)).max() < 1e-10
        assert iso.recon_defect <= 1e-8
        rot = np.einsum("ai,gab,bj->gij", np.conj(u),
                        ctx.rep.matrices.astype(complex), u)
        mask = np.ones((ctx.group.order, ctx.group.order), dtype=bool)
        for s in iso.slices:
            mask[s, s] = False
        assert np.abs(rot[:, mask]).max() < 1e-8


def test_a1_double_edge():
    g = build_group("A", 1)
    mk = mckay_graph(g)
    assert mk.adjacency.tolist() == [[0, 2], [2, 0]]
    assert mk.dynkin_label == "A~1"


def test_a2_is_three_cycle(get_context):
    mk = get_context("A", 2).mckay
    assert np.array_equal(mk.adjacency, np.ones((3, 3), dtype=int) - np.eye(3, dtype=int))


def test_d2_star(get_context):
    mk = get_context("D", 2).mckay
    degrees = mk.adjacency.sum(axis=1)
    center = int(np.argmax(degrees))
    assert degrees[center] == 4
    assert mk.marks[center] == 2


def test_tensor_dimension_identity(get_context):
    for family, k in [("A", 1), ("A", 4), ("D", 2), ("D", 4), ("E6", None)]:
        mk = get_context(family, k).mckay
        assert np.array_equal(mk.adjacency @ mk.marks, 2 * mk.marks)


def test_extended_cartan_null_vector(get_context):
    for family, k in [("A", 2), ("D", 3), ("E6", None)]:
        mk = get_context(family, k).mckay
        assert np.abs(mk.cartan_ext @ mk.marks).max() == 0


@pytest.mark.parametrize("cartan,count", [
    (np.array([[2]]), 2),                              # A1
    (np.array([[2, -1], [-1, 2]]), 6),                 # A2
])
def test_small_root_systems(cartan, count):
    roots = enumerate_roots(cartan)
    assert roots.shape[0] == count
    assert np.array_equal(roots, root_enumeration_oracle(cartan))


def test_root_systems_match_exhaustive_oracle(get_context):
    for family, k in [("A", 3), ("D", 2), ("E6", None)]:
        mk = get_context(family, k).mckay
        roots = mk.roots
        oracle = root_enumeration_oracle(mk.cartan)
        assert np.array_equal(roots, np.array(sorted(map(tuple, oracle))))


def test_root_counts(get_context):
    # A_r: r(r+1), D_r: 2r(r-1), E6: 72
    assert get_context("A", 1).mckay.roots.shape[0] == 2
    assert get_context("A", 2).mckay.roots.shape[0] == 6
    assert get_context("D", 2).mckay.roots.shape[0] == 24
    assert get_context("E6", None).mckay.roots.shape[0] == 72


def test_roots_negation_closed_and_norm(get_context):
    for family, k in [("A", 2), ("D", 2), ("E6", None)]:
        mk = get_context(family, k).mckay
        as_set = {tuple(r) for r in mk.roots}
        assert {tuple(-r) for r in mk.roots} == as_set
        gram = mk.roots @ mk.cartan @ mk.roots.T
        assert np.abs(np.diag(gram) - 2).max() == 0


def test_root_enumeration_stable():
    mk = mckay_graph(build_group("D", 2))
    r1 = enumerate_roots(mk.cartan)
    r2 = enumerate_roots(mk.cartan)
    assert np.array_equal(r1, r2)


def test_affine_templates_have_null_marks():
    for label in ["A~1", "A~4", "D~4", "D~6", "E~6", "E~7", "E~8"]:
        marks, adj = affine_template(label)
        cartan_ext = 2 * np.eye(len(marks), dtype=int) - adj
        assert np.abs(cartan_ext @ marks).max() == 0, label


def test_isotypic_projectors(get_context):
    ctx = get_context("D", 2)
    projs = isotypic_projectors(ctx.mckay)
    n = ctx.group.order
    total = projs.sum(axis=0)
    assert np.abs(total - np.eye(n)).max() < 1e-10
    for i, p in enumerate(projs):
        assert np.abs(p @ p - p).max() < 1e-10
        assert abs(np.trace(p).real - ctx.mckay.marks[i] ** 2) < 1e-8
        for g in range(n):
            assert np.abs(p @ ctx.rep.matrices[g] - ctx.rep.matrices[g] @ p).max() < 1e-9


def test_not_ade_on_garbage():
    marks = np.array([1, 3])
    adj = np.array([[0, 1], [1, 0]])
    with pytest.raises(NotADE):
        _identify_affine_label(adj, marks)
