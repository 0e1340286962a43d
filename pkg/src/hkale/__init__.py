"""Hyperkahler quotients of invariant matrix pairs for finite SU(2) subgroups.

The package builds the ADE matrix groups, their McKay data, the flat
quaternionic module of invariant pairs, solves the three moment map equations
at a chosen level, samples the induced metric on the 4-dimensional quotient,
and verifies the equivariant-section reformulation of the same structure by
sphere quadrature.
"""

from .config import DEFAULT_TOL, Tolerances
from .flat_module import (
    GaugeAlgebra,
    InvariantBasis,
    MatrixPair,
    f_action,
    gauge_algebra,
    invariant_basis,
    membership_defect,
    orbit_directions,
    pair_inner,
    pair_norm,
    quaternion_I,
    quaternion_J,
    quaternion_K,
)
from .gauge_bridge import (
    SectionSample,
    SphereSample,
    build_sphere_sample,
    flat_forms,
    j_on_section,
    mu1_reduction_check,
    quadrature_forms,
    reduced_moment_integrands,
    section_from_pair,
)
from .groups import FiniteSubgroup, build_group, verify_group
from .mckay import (
    McKayData,
    RegularRep,
    enumerate_roots,
    isotypic_decompose,
    mckay_graph,
    regular_representation,
)
from .moments import (
    CartanImage,
    MomentValue,
    Zeta,
    is_good_zeta,
    make_zeta,
    moment,
    moment_jacobian,
    random_good_zeta,
    zeta_matrices,
    zeta_to_cartan,
)
from .pipeline import Context, PipelineConfig, RunReport, build_context, run_pipeline
from .solver import (
    HorizontalFrame,
    MetricSample,
    SolveResult,
    SolverOptions,
    cone_defect_a1,
    cone_oracle_a1,
    horizontal_frame,
    metric_sample,
    solve_moment,
    stabilizer_check,
)

__version__ = "0.1.0"
