import numpy as np
import pytest

from hkale.groups import (
    NonClosure,
    NotInSU2,
    build_group,
    element_order,
    verify_group,
)


def brute_force_closure(gens, cap=300):
    """Independent oracle: set-based closure with coarse rounding keys."""
    def key(m):
        return tuple(np.round(m.ravel().view(float), 6).tolist())

    elems = {key(np.eye(2, dtype=complex)): np.eye(2, dtype=complex)}
    changed = True
    while changed:
        changed = False
        for m in list(elems.values()):
            for g in gens:
                p = m @ g
                if key(p) not in elems:
                    elems[key(p)] = p
                    changed = True
                    if len(elems) > cap:
                        raise RuntimeError("runaway closure")
    return list(elems.values())


def conj_class_count_oracle(group):
    """Independent oracle: conjugation orbits computed on raw matrices."""
    elems = group.elements
    n = elems.shape[0]

    def find(m):
        d = np.abs(elems - m).reshape(n, -1).max(axis=1)
        j = int(np.argmin(d))
        assert d[j] < 1e-8
        return j

    unassigned = set(range(n))
    count = 0
    while unassigned:
        g = min(unassigned)
        orbit = {find(elems[h] @ elems[g] @ np.linalg.inv(elems[h])) for h in range(n)}
        unassigned -= orbit
        count += 1
    return count


EXPECTED_ORDERS = [
    ("A", 1, 2), ("A", 2, 3), ("A", 3, 4), ("A", 4, 5),
    ("D", 2, 8), ("D", 3, 12), ("D", 4, 16),
    ("E6", None, 24), ("E7", None, 48), ("E8", None, 120),
]


@pytest.mark.parametrize("family,k,order", EXPECTED_ORDERS)
def test_group_orders(family, k, order):
    g = build_group(family, k)
    assert g.order == order
    assert g.elements.shape == (order, 2, 2)


def test_a1_is_center_of_su2():
    g = build_group("A", 1)
    assert g.order == 2
    assert np.abs(g.elements[0] - np.eye(2)).max() < 1e-15
    assert np.abs(g.elements[1] + np.eye(2)).max() < 1e-12
    assert g.has_minus_id and g.minus_id_index == 1


def test_d2_closure_independent_oracle():
    # quaternion units i and j generate the order-8 quaternion group
    qi = np.array([[1j, 0], [0, -1j]])
    qj = np.array([[0, 1], [-1, 0]], dtype=complex)
    assert len(brute_force_closure([qi, qj])) == 8
    assert build_group("D", 2).order == 8


def test_e8_closure_independent_oracle():
    g = build_group("E8", None)
    gens = [g.elements[i] for i in range(1, 1 + g.n_generators)]
    assert len(brute_force_closure(gens)) == 120


def test_elements_are_unitary_det_one():
    for family, k, _ in EXPECTED_ORDERS:
        g = build_group(family, k)
        for m in g.elements:
            assert np.abs(m @ m.conj().T - np.eye(2)).max() < 1e-12
            assert abs(np.linalg.det(m) - 1.0) < 1e-12


def test_cayley_matches_matrix_products():
    for family, k in [("A", 3), ("D", 2), ("E6", None)]:
        g = build_group(family, k)
        n = g.order
        rng = np.random.default_rng(1)
        for _ in range(50):
            i, j = rng.integers(0, n, size=2)
            prod = g.elements[i] @ g.elements[j]
            assert np.abs(prod - g.elements[g.cayley[i, j]]).max() < 1e-10


def test_identity_first_and_inverses():
    for family, k in [("A", 2), ("D", 3), ("E7", None)]:
        g = build_group(family, k)
        assert np.abs(g.elements[0] - np.eye(2)).max() < 1e-15
        for i in range(g.order):
            assert g.cayley[i, g.inverse[i]] == 0
            assert g.cayley[g.inverse[i], i] == 0


def test_element_orders_divide_group_order():
    for family, k in [("A", 4), ("D", 2), ("E6", None), ("E8", None)]:
        g = build_group(family, k)
        for i in range(g.order):
            assert g.order % element_order(g, i) == 0


@pytest.mark.parametrize("family,k,classes", [("A", 1, 2), ("D", 2, 5), ("E6", None, 7)])
def test_conjugacy_class_counts(family, k, classes):
    g = build_group(family, k)
    assert len(g.conj_classes) == classes
    assert conj_class_count_oracle(g) == classes


def test_minus_id_detection():
    assert build_group("A", 2).minus_id_index is None      # odd cyclic
    assert build_group("A", 3).has_minus_id                # Z/4 contains -1
    for family, k in [("D", 2), ("E6", None), ("E7", None), ("E8", None)]:
        assert build_group(family, k).has_minus_id


def test_deterministic_ordering():
    g1 = build_group("D", 3)
    g2 = build_group("D", 3)
    assert np.array_equal(g1.elements, g2.elements)
    assert np.array_equal(g1.cayley, g2.cayley)


def test_char_q_real():
    for family, k in [("A", 4), ("E8", None)]:
        g = build_group(family, k)
        assert np.abs(np.trace(g.elements, axis1=1, axis2=2).imag).max() < 1e-12


def test_verify_group_passes():
    for family, k in [("A", 1), ("D", 2), ("E6", None)]:
        rep = verify_group(build_group(family, k))
        assert rep.passed, rep.to_dict()


def test_bad_parameters_rejected():
    with pytest.raises(ValueError):
        build_group("A", 0)
    with pytest.raises(ValueError):
        build_group("B", 2)


def test_not_in_su2_and_nonclosure(monkeypatch):
    import hkale.groups as groups_mod

    monkeypatch.setattr(groups_mod, "_generators",
                        lambda f, k: [np.array([[2.0, 0], [0, 0.5]], dtype=complex)])
    with pytest.raises(NotInSU2):
        build_group("A", 1)

    # an irrational rotation never closes
    theta = np.sqrt(2.0)
    gen = np.array([[np.exp(1j * theta), 0], [0, np.exp(-1j * theta)]])
    monkeypatch.setattr(groups_mod, "_generators", lambda f, k: [gen])
    with pytest.raises(NonClosure):
        build_group("A", 1)
