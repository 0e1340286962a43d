"""JSON caching of groups, McKay data and invariant bases.

One directory per cache key (family plus parameter), three files inside.
Complex arrays are stored as nested lists with [re, im] leaf pairs; floats
round-trip exactly through the standard JSON writer, which emits the shortest
representation that parses back to the identical double.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .flat_module import InvariantBasis
from .groups import FiniteSubgroup, group_label
from .mckay import IsotypicDecomposition, McKayData

__all__ = [
    "cache_key",
    "save_group",
    "load_group",
    "save_mckay",
    "load_mckay",
    "save_basis",
    "load_basis",
    "complex_to_json",
    "complex_from_json",
    "BASIS_CACHE_CAP",
]

# invariant-basis files grow as |G|^3; past this order rebuilding is cheaper
# than parsing
BASIS_CACHE_CAP = 48


def cache_key(family: str, k: int | None) -> str:
    return group_label(family, k)


def complex_to_json(arr: np.ndarray):
    """Nested lists with [re, im] pairs at the leaves."""
    arr = np.asarray(arr, dtype=complex)
    re = arr.real
    im = arr.imag
    stacked = np.stack([re, im], axis=-1)
    return stacked.tolist()


def complex_from_json(data) -> np.ndarray:
    stacked = np.asarray(data, dtype=float)
    return stacked[..., 0] + 1j * stacked[..., 1]


def _path(cache_dir, key: str, name: str) -> Path:
    return Path(cache_dir) / key / name


def _write(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")


def _read(path: Path) -> dict | None:
    if not path.exists():
        return None
    return json.loads(path.read_text(encoding="utf-8"))


def save_group(group: FiniteSubgroup, cache_dir) -> Path:
    key = cache_key(group.family, group.k)
    payload = {
        "label": group.label,
        "family": group.family,
        "k": group.k,
        "order": group.order,
        "n_generators": group.n_generators,
        "elements": complex_to_json(group.elements),
        "cayley": group.cayley.tolist(),
        "inverse": group.inverse.tolist(),
        "conj_classes": [list(c) for c in group.conj_classes],
        "minus_id_index": group.minus_id_index,
    }
    path = _path(cache_dir, key, "group.json")
    _write(path, payload)
    return path


def load_group(family: str, k: int | None, cache_dir) -> FiniteSubgroup | None:
    data = _read(_path(cache_dir, cache_key(family, k), "group.json"))
    if data is None:
        return None
    return FiniteSubgroup(
        label=data["label"],
        family=data["family"],
        k=data["k"],
        elements=complex_from_json(data["elements"]),
        cayley=np.asarray(data["cayley"], dtype=np.int64),
        inverse=np.asarray(data["inverse"], dtype=np.int64),
        conj_classes=tuple(tuple(c) for c in data["conj_classes"]),
        minus_id_index=data["minus_id_index"],
        n_generators=data["n_generators"],
    )


def save_mckay(mckay: McKayData, key: str, cache_dir) -> Path:
    iso = mckay.isotypic
    payload = {
        "marks": mckay.marks.tolist(),
        "adjacency": mckay.adjacency.tolist(),
        "dynkin_label": mckay.dynkin_label,
        "roots": mckay.roots.tolist(),
        "isotypic_basis": complex_to_json(iso.basis),
        "slices": [[s.start, s.stop] for s in iso.slices],
        "characters": complex_to_json(iso.characters),
        "recon_defect": iso.recon_defect,
    }
    path = _path(cache_dir, key, "mckay.json")
    _write(path, payload)
    return path


def load_mckay(key: str, cache_dir) -> McKayData | None:
    data = _read(_path(cache_dir, key, "mckay.json"))
    if data is None:
        return None
    marks = np.asarray(data["marks"], dtype=int)
    adjacency = np.asarray(data["adjacency"], dtype=int)
    iso = IsotypicDecomposition(
        basis=complex_from_json(data["isotypic_basis"]),
        slices=tuple(slice(a, b) for a, b in data["slices"]),
        marks=marks,
        characters=complex_from_json(data["characters"]),
        recon_defect=float(data["recon_defect"]),
    )
    r1 = marks.shape[0]
    cartan_ext = 2 * np.eye(r1, dtype=int) - adjacency
    return McKayData(
        marks=marks,
        adjacency=adjacency,
        cartan_ext=cartan_ext,
        cartan=cartan_ext[1:, 1:],
        dynkin_label=data["dynkin_label"],
        roots=np.asarray(data["roots"], dtype=int),
        isotypic=iso,
    )


def save_basis(basis: InvariantBasis, key: str, cache_dir, order: int) -> Path | None:
    if order > BASIS_CACHE_CAP:
        return None
    payload = {
        "ambient_dim": basis.ambient_dim,
        "alphas": complex_to_json(basis.alphas),
        "betas": complex_to_json(basis.betas),
    }
    path = _path(cache_dir, key, "basis.json")
    _write(path, payload)
    return path


def load_basis(key: str, cache_dir) -> InvariantBasis | None:
    data = _read(_path(cache_dir, key, "basis.json"))
    if data is None:
        return None
    return InvariantBasis(
        alphas=complex_from_json(data["alphas"]),
        betas=complex_from_json(data["betas"]),
        ambient_dim=int(data["ambient_dim"]),
    )
