"""Central numerical tolerances and per-stage RNG derivation.

Every threshold used anywhere in the package lives in one frozen dataclass so
precision experiments only have one knob to turn.  RNG streams are derived
from a single pipeline seed through fixed integer stage labels, which keeps
every stage individually reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds, grouped roughly by the layer that consumes them."""

    # group construction
    unitary: float = 1e-12
    closure_match: float = 1e-10
    dedup_grid: float = 1e-9

    # representation theory
    mckay_integer: float = 1e-6
    isotypic_recon: float = 1e-8
    eig_cluster_gap: float = 1e-6

    # flat module
    membership: float = 1e-9
    orthonormal: float = 1e-10
    commutant: float = 1e-10
    rank_cut: float = 1e-8

    # moment geometry
    trace: float = 1e-10
    good_zeta: float = 1e-10
    jacobian_fd: float = 1e-6
    fd_step: float = 1e-5

    # quotient solver
    solver_target: float = 1e-10
    solver_converged: float = 1e-8
    stabilizer: float = 1e-8
    kernel_cut: float = 1e-5
    frame_kernel: float = 1e-7
    frame_orbit: float = 1e-8
    projection_defect: float = 1e-5
    quaternion_sample: float = 1e-6
    cone_defect: float = 1e-7

    # gauge bridge
    pointwise_identity: float = 1e-12
    integrand_identity: float = 1e-10
    metric_agreement: float = 1e-9
    sample_normalization: float = 1e-12
    relabel_invariance: float = 1e-9


DEFAULT_TOL = Tolerances()

# Fixed labels so stage streams never depend on dict ordering or hashing.
_STAGE_LABELS = {
    "zeta": 101,
    "solver_seed": 102,
    "sphere": 103,
    "jacobian_points": 104,
    "probe": 105,
    "pairs": 106,
}

# Construction-time randomness (range finders, eigen splitters) is pinned to a
# constant so caches are pure functions of (family, k).
CONSTRUCTION_SEED = 0xB5


def stage_rng(seed: int, stage: str) -> np.random.Generator:
    """Deterministic per-stage generator derived from the pipeline seed."""
    if stage not in _STAGE_LABELS:
        raise KeyError(f"unknown stage label: {stage!r}")
    return np.random.default_rng(np.random.SeedSequence((int(seed), _STAGE_LABELS[stage])))


def construction_rng() -> np.random.Generator:
    """Fixed-seed generator for basis/algebra construction."""
    return np.random.default_rng(CONSTRUCTION_SEED)
