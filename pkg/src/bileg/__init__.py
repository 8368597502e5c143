"""Clifford-algebra tools for bilegendrian surfaces and constant extrinsic curvature."""

from .cec import (
    FlatMetricData,
    FundamentalForms,
    GaussLift,
    HazzidakiReport,
    SineGordonReport,
    SurfacePatch,
    ThetaGrid,
    chebyshev_forms,
    flat_metric,
    fundamental_forms,
    gauss_lift,
    hazzidaki,
    hyperbolic_cylinder_patch,
    pseudosphere_patch,
    sine_gordon_residual,
)
from .clifford import (
    CliffordElement,
    PlaneSpan,
    Signature2,
    basis,
    classify_plane,
    effective_pair_check,
    eigen_split,
    eigenspaces_of_mx,
    element,
    from_coeffs,
    inner_g,
    inner_ghat,
    invariant_plane_test,
    bilagrangian_test,
    mul,
    principal_line,
    principal_vectors,
)
from .contact import (
    AmbientForm4,
    BasePoint,
    ContactVector,
    StructureFrame,
    clifford_isomorphism,
    covariant_constancy_residual,
    curvature_pairing,
    frame_at,
    stabilizer_membership,
    w_project,
)
from .errors import (
    BilegError,
    NoMaximalLattice,
    NotFactorizable,
    PreconditionError,
    ValidationError,
)
from .factory import (
    AngleData,
    Factorization,
    FlatTorusReport,
    FramedCurve,
    GaussMapData,
    ImmersionGrid,
    LieFactors,
    NoLattice,
    PeriodLattice,
    angle_function,
    asymptotic_frame,
    construct,
    cubic_form_entries,
    factorize,
    flat_torus_criteria,
    from_theta,
    gauss_map,
    lie_factorize,
    period_lattice,
    projection_immersion_test,
    residual_suite,
    torus_ansatz,
)
from .sphere import (
    Holonomy,
    HorizontalCurve,
    SphereCurve,
    gauss_bonnet_check,
    holonomy,
    holonomy_area_check,
    hopf,
    hopf_preimage,
    horizontal_lift,
    latitude_circle,
    reduce_mod_4pi,
    reparametrize,
    rotate_A,
    signed_area,
)

__all__ = [
    "BilegError",
    "ValidationError",
    "PreconditionError",
    "NotFactorizable",
    "NoMaximalLattice",
    "Signature2",
    "CliffordElement",
    "PlaneSpan",
    "element",
    "from_coeffs",
    "basis",
    "mul",
    "inner_g",
    "inner_ghat",
    "eigenspaces_of_mx",
    "invariant_plane_test",
    "bilagrangian_test",
    "classify_plane",
    "principal_vectors",
    "principal_line",
    "eigen_split",
    "effective_pair_check",
    "AmbientForm4",
    "BasePoint",
    "ContactVector",
    "StructureFrame",
    "frame_at",
    "w_project",
    "covariant_constancy_residual",
    "curvature_pairing",
    "stabilizer_membership",
    "clifford_isomorphism",
    "SphereCurve",
    "HorizontalCurve",
    "Holonomy",
    "rotate_A",
    "hopf",
    "hopf_preimage",
    "latitude_circle",
    "reparametrize",
    "horizontal_lift",
    "signed_area",
    "holonomy",
    "holonomy_area_check",
    "gauss_bonnet_check",
    "reduce_mod_4pi",
    "ImmersionGrid",
    "Factorization",
    "LieFactors",
    "AngleData",
    "FramedCurve",
    "PeriodLattice",
    "NoLattice",
    "GaussMapData",
    "FlatTorusReport",
    "construct",
    "factorize",
    "lie_factorize",
    "residual_suite",
    "cubic_form_entries",
    "angle_function",
    "asymptotic_frame",
    "from_theta",
    "projection_immersion_test",
    "torus_ansatz",
    "period_lattice",
    "gauss_map",
    "flat_torus_criteria",
    "SurfacePatch",
    "FundamentalForms",
    "GaussLift",
    "FlatMetricData",
    "ThetaGrid",
    "SineGordonReport",
    "HazzidakiReport",
    "fundamental_forms",
    "gauss_lift",
    "flat_metric",
    "chebyshev_forms",
    "sine_gordon_residual",
    "hazzidaki",
    "pseudosphere_patch",
    "hyperbolic_cylinder_patch",
]

__version__ = "0.1.0"
