"""Tight wavelet frames built in the frequency domain.

Closed-form refinable functions and wavelets for expansive dilations,
directional families, filter banks, numerical checks of the frame
identities, and a discrete periodic transform.
"""

from .directional import (
    DirectionalFamily,
    build_directional_family_2d,
    directional_count,
    support_descriptor,
)
from .errors import *  # noqa: F401,F403
from .filterbank import (
    FilterBank,
    Mask,
    MaskBudget,
    derive_masks,
    haar_bank,
    library_budget,
    nonstationary_product,
    oep_residuals,
    polyphase_identity_residual,
    refinement_residual,
    theta_limit_residual,
)
from .generators import (
    GeneratorEvaluator,
    calderon_residual,
    construct_phi,
    construct_psi,
    lowpass_limit_residual,
    telescoping_residual,
)
from .grid import ConditionReport, FrequencyGrid, TestFunction
from .io import read_grid, read_pgm, write_grid, write_pgm
from .lattice import (
    AdaptedNorm,
    DilationMatrix,
    analyze_dilation,
    build_adapted_norm,
    certify_lattice_conditions,
    choose_support_radius,
    coset_representatives,
)
from .transform import (
    CoefficientPyramid,
    TransformPlan,
    analyze,
    make_plan,
    pr_residual,
    synthesize,
)
from .verify import (
    WaveletSystem,
    bessel_bound_estimate,
    bracket_I,
    bracket_product_oracle,
    directional_system,
    dual_frame_condition_residuals,
    mra_consistency_residual,
    oracle_suite,
    parseval_energy_test,
    partial_sum_S,
    predicted_termination,
    stationary_system,
)
from .windows import build_angular_window, smooth_step, tensor_cutoff

__version__ = "0.1.0"
