"""Finite subgroups of SU(2) as explicit matrix groups.

Builds the cyclic, binary dihedral, binary tetrahedral, binary octahedral and
binary icosahedral groups from fixed quaternion generators, closes them by
breadth-first multiplication, and assembles the Cayley table, inverses and
conjugacy classes.  Element ordering is deterministic: identity first, then
BFS discovery order, so indices are stable across runs and safe to cache.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL, Tolerances

__all__ = [
    "FiniteSubgroup",
    "GroupReport",
    "NonClosure",
    "NotInSU2",
    "build_group",
    "verify_group",
    "element_order",
    "group_label",
]

FAMILIES = ("A", "D", "E6", "E7", "E8")

_CLOSURE_CAP = 200
_PHI = (1.0 + np.sqrt(5.0)) / 2.0


class NonClosure(RuntimeError):
    """Generator closure exceeded the element cap; generators are wrong."""


class NotInSU2(ValueError):
    """A generator fails the unitarity or determinant check."""


def _su2(u: complex, v: complex) -> np.ndarray:
    """Matrix (u v; -v* u*).  The second row is derived from the first, so the
    SU(2) structure holds exactly in floating point."""
    return np.array([[u, v], [-np.conj(v), np.conj(u)]], dtype=complex)


def _quat(a: float, b: float, c: float, d: float) -> np.ndarray:
    """Unit quaternion a + bi + cj + dk as an SU(2) matrix, u = a+ib, v = c+id."""
    return _su2(a + 1j * b, c + 1j * d)


def _generators(family: str, k: int | None) -> list[np.ndarray]:
    if family == "A":
        # cyclic of order k+1
        n = k + 1
        return [_su2(np.exp(2j * np.pi / n), 0.0)]
    if family == "D":
        # binary dihedral of order 4k: a rotation of order 2k plus the quaternion j
        return [_su2(np.exp(1j * np.pi / k), 0.0), _quat(0, 0, 1, 0)]
    if family == "E6":
        # binary tetrahedral: quaternion units i, j and omega = (-1+i+j+k)/2
        return [_quat(0, 1, 0, 0), _quat(0, 0, 1, 0), _quat(-0.5, 0.5, 0.5, 0.5)]
    if family == "E7":
        # binary octahedral: binary tetrahedral plus (1+i)/sqrt(2)
        s = 1.0 / np.sqrt(2.0)
        return _generators("E6", None) + [_su2(s + 1j * s, 0.0)]
    if family == "E8":
        # binary icosahedral: omega and the golden-ratio element (phi + i/phi + j)/2
        return [
            _quat(-0.5, 0.5, 0.5, 0.5),
            _quat(_PHI / 2.0, 1.0 / (2.0 * _PHI), 0.5, 0.0),
        ]
    raise ValueError(f"unknown family {family!r}, expected one of {FAMILIES}")


def group_label(family: str, k: int | None) -> str:
    return f"{family}{k}" if family in ("A", "D") else family


def _expected_order(family: str, k: int | None) -> int:
    if family == "A":
        return k + 1
    if family == "D":
        return 4 * k
    return {"E6": 24, "E7": 48, "E8": 120}[family]


def _grid_key(m: np.ndarray, grid: float) -> bytes:
    """Dedup key: entries snapped to a fixed grid.  Floating-point closure
    needs a deterministic equality notion."""
    return np.round(m.view(np.float64).ravel() / grid).astype(np.int64).tobytes()


@dataclass(frozen=True)
class FiniteSubgroup:
    """A finite subgroup of SU(2) with full multiplicative bookkeeping.

    Immutable after construction; safe to share across workers.  ``elements``
    is the ordered stack of 2x2 unitary matrices, ``cayley[i, j]`` the index
    of ``elements[i] @ elements[j]``.
    """

    label: str
    family: str
    k: int | None
    elements: np.ndarray          # (n, 2, 2) complex
    cayley: np.ndarray            # (n, n) int
    inverse: np.ndarray           # (n,) int
    conj_classes: tuple[tuple[int, ...], ...]
    minus_id_index: int | None
    n_generators: int = 0         # BFS puts the generators at indices 1..n_generators

    @property
    def order(self) -> int:
        return self.elements.shape[0]

    @property
    def has_minus_id(self) -> bool:
        return self.minus_id_index is not None

    def element_mul(self, i: int, j: int) -> int:
        return int(self.cayley[i, j])

    def uv(self, i: int) -> tuple[complex, complex]:
        """Top-row entries (u, v) of element i."""
        return complex(self.elements[i, 0, 0]), complex(self.elements[i, 0, 1])

    def char_q(self) -> np.ndarray:
        """Character of the defining 2-dim representation, real for SU(2)."""
        return np.real(np.trace(self.elements, axis1=1, axis2=2))


def build_group(family: str, k: int | None = None, tol: Tolerances = DEFAULT_TOL) -> FiniteSubgroup:
    """Close the standard generators of the requested family into a matrix group.

    Ordering is identity first, then breadth-first over right multiplication
    by generators, which makes element indices reproducible.

    Raises
    ------
    NotInSU2
        if a generator is not unitary with determinant one.
    NonClosure
        if closure exceeds the element cap (bad generators).
    """
    if family in ("A", "D"):
        if k is None or k < 1:
            raise ValueError(f"family {family} needs an integer parameter k >= 1")
    gens = _generators(family, k)
    for g in gens:
        if np.abs(g @ g.conj().T - np.eye(2)).max() > tol.unitary:
            raise NotInSU2("generator is not unitary")
        if abs(np.linalg.det(g) - 1.0) > tol.unitary:
            raise NotInSU2("generator determinant is not 1")

    elems: list[np.ndarray] = [np.eye(2, dtype=complex)]
    index: dict[bytes, int] = {_grid_key(elems[0], tol.dedup_grid): 0}

    def locate(m: np.ndarray) -> int | None:
        hit = index.get(_grid_key(m, tol.dedup_grid))
        if hit is not None:
            return hit
        # grid-boundary fallback: nearest-element scan
        stack = np.stack(elems)
        dist = np.abs(stack - m).reshape(len(elems), -1).max(axis=1)
        j = int(np.argmin(dist))
        return j if dist[j] < 100 * tol.dedup_grid else None

    head = 0
    while head < len(elems):
        cur = elems[head]
        head += 1
        for g in gens:
            prod = cur @ g
            if locate(prod) is None:
                if len(elems) >= _CLOSURE_CAP:
                    raise NonClosure(f"closure exceeded {_CLOSURE_CAP} elements for {family}")
                index[_grid_key(prod, tol.dedup_grid)] = len(elems)
                elems.append(prod)

    stack = np.stack(elems)
    n = len(elems)

    cayley = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        prods = np.einsum("ab,nbc->nac", stack[i], stack)
        dist = np.abs(stack[None, :, :, :] - prods[:, None, :, :]).reshape(n, n, -1).max(axis=2)
        nearest = np.argmin(dist, axis=1)
        if dist[np.arange(n), nearest].max() > tol.closure_match:
            raise NonClosure("product fell outside the closed element set")
        cayley[i] = nearest

    inverse = np.zeros(n, dtype=np.int64)
    for i in range(n):
        hits = np.where(cayley[i] == 0)[0]
        inverse[i] = int(hits[0])

    classes = _conjugacy_classes(cayley, inverse)

    minus = None
    dist = np.abs(stack + np.eye(2)).reshape(n, -1).max(axis=1)
    j = int(np.argmin(dist))
    if dist[j] < tol.closure_match:
        minus = j

    return FiniteSubgroup(
        label=group_label(family, k),
        family=family,
        k=k if family in ("A", "D") else None,
        elements=stack,
        cayley=cayley,
        inverse=inverse,
        conj_classes=classes,
        minus_id_index=minus,
        n_generators=len(gens),
    )


def _conjugacy_classes(cayley: np.ndarray, inverse: np.ndarray) -> tuple[tuple[int, ...], ...]:
    """Exact orbit partition under conjugation over the Cayley table.

    Works on indices only; trace bucketing is avoided because traces collide.
    """
    n = cayley.shape[0]
    seen = np.zeros(n, dtype=bool)
    classes = []
    for g in range(n):
        if seen[g]:
            continue
        orbit = sorted({int(cayley[cayley[h, g], inverse[h]]) for h in range(n)})
        for x in orbit:
            seen[x] = True
        classes.append(tuple(orbit))
    return tuple(classes)


def element_order(group: FiniteSubgroup, i: int) -> int:
    """Multiplicative order of element i, from the Cayley table."""
    cur, order = i, 1
    while cur != 0:
        cur = int(group.cayley[cur, i])
        order += 1
    return order


@dataclass
class GroupReport:
    """Pass/fail record per construction invariant.  Failures are carried,
    never raised."""

    label: str
    order: int
    n_conj_classes: int
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c["ok"] for c in self.checks.values())

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "order": self.order,
            "n_conj_classes": self.n_conj_classes,
            "passed": self.passed,
            "checks": self.checks,
        }


def verify_group(group: FiniteSubgroup, tol: Tolerances = DEFAULT_TOL,
                 n_assoc_samples: int = 64) -> GroupReport:
    """Re-derive every structural invariant of the group and report defects."""
    n = group.order
    stack = group.elements
    report = GroupReport(label=group.label, order=n, n_conj_classes=len(group.conj_classes))

    def record(name, value, bound):
        report.checks[name] = {"value": float(value), "tolerance": float(bound),
                               "ok": bool(value <= bound)}

    unit = max(np.abs(stack[i] @ stack[i].conj().T - np.eye(2)).max() for i in range(n))
    record("unitary", unit, tol.unitary)
    det = max(abs(np.linalg.det(stack[i]) - 1.0) for i in range(n))
    record("det_one", det, tol.unitary)
    record("identity_first", np.abs(stack[0] - np.eye(2)).max(), tol.unitary)

    closure = 0.0
    for i in range(n):
        prods = np.einsum("ab,nbc->nac", stack[i], stack)
        closure = max(closure, np.abs(prods - stack[group.cayley[i]]).max())
    record("closure", closure, tol.closure_match)

    two_sided = max(
        abs(int(group.cayley[i, group.inverse[i]]))
        + abs(int(group.cayley[group.inverse[i], i]))
        for i in range(n)
    )
    record("two_sided_inverse", two_sided, 0)

    rng = np.random.default_rng(0)
    triples = rng.integers(0, n, size=(n_assoc_samples, 3))
    assoc = max(
        abs(int(group.cayley[group.cayley[a, b], c]) - int(group.cayley[a, group.cayley[b, c]]))
        for a, b, c in triples
    )
    record("associativity_spot", assoc, 0)

    expected = _expected_order(group.family, group.k)
    record("family_order", abs(n - expected), 0)

    lagrange = max(n % element_order(group, i) for i in range(n))
    record("lagrange", lagrange, 0)

    chi_imag = np.abs(np.trace(stack, axis1=1, axis2=2).imag).max()
    record("char_q_real", chi_imag, tol.closure_match)

    if group.has_minus_id:
        record("minus_id", np.abs(stack[group.minus_id_index] + np.eye(2)).max(),
               tol.closure_match)

    return report
