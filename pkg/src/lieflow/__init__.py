"""Modules of polynomial vector fields, their flows, and flow-invariance checks."""

from ._backend import BACKEND
from .cocycle import (
    CocycleSolution,
    commutativity_defect,
    expm,
    fundamental_solution,
    naive_exponential,
    solve_fundamental_and_naive,
    structure_matrix_along_flow,
)
from .errors import (
    DimensionMismatch,
    DomainExitError,
    IntegrationError,
    LieflowError,
    ParseError,
    ScenarioError,
    StepLimitExceeded,
    StructureNotFound,
)
from .flow import DEFAULT_CONFIG, FlowResult, IntegratorConfig, flow, pushforward_direct
from .module_algebra import (
    GeneratorSet,
    InvolutivityTable,
    MembershipCertificate,
    StructureMatrix,
    default_degree_bound,
    involutivity_check,
    polynomial_membership,
    solve_structure_matrix,
)
from .parsing import parse_polynomial, parse_vector_field
from .polyfield import ChartBox, Polynomial, PolyVectorField, leibniz_expand, lie_bracket
from .scenario_io import load_scenario, parse_scenario_text
from .verifier import (
    Scenario,
    VerificationReport,
    span_membership_residual,
    verify_inverse,
    verify_module_morphism,
    verify_scenario,
)

__version__ = "0.1.0"
