"""Word-series algebra for splitting integrators on perturbed oscillatory systems.

The package implements the coefficient algebra of word series (shuffle
characters, convolution exponentials, brackets), its rotation-extended
variant for perturbed integrable problems, exact flow and splitting
coefficients, normal forms, modified equations, processing maps, and a small
simulation layer with a command-line front end.
"""

from .words import EMPTY_WORD, Word, WordSum, all_words, deconcatenations, shuffle
from .algebra import (
    CoeffMap,
    bracket,
    coeffmap_from_json,
    coeffmap_to_json,
    convolve,
    exp_star,
    log_star,
    perturbation_element,
    star_inverse,
    unit,
    verify_membership,
    zero_map,
)
from .extended import (
    ExtCoeff,
    FrequencySpec,
    apply_Xi,
    apply_xi,
    big_star,
    ext_bracket,
    ext_inverse,
    ext_unit,
    word_frequency,
)
from .exppoly import ExpPoly, exppoly_antiderivative, exppoly_integrate
from .flows import flow_coefficients, flow_exppolys, word_flow_poly
from .splitting import (
    LIE_TROTTER,
    NAMED_SCHEMES,
    STRANG,
    SplittingScheme,
    detect_numerical_resonances,
    local_error_coefficients,
    m_step_error_coefficients,
    quadrature_error,
    scaled_exact_value,
    sigma,
    splitting_coefficients,
    splitting_coefficients_by_composition,
)
from .transforms import (
    ModifiedEquation,
    NormalFormResult,
    ProcessorResult,
    ResonanceObstruction,
    change_of_variables,
    commuting_decomposition,
    conjugation_residual,
    first_order_processor_map,
    flow_factorization,
    modified_equation,
    normal_form,
    processor,
)
from .poly import (
    Chart,
    PolyObservable,
    complex_to_pq,
    conjugate_observable,
    hamiltonian_vector_field,
    poisson_bracket,
    poly_from_json,
    poly_to_json,
    pq_to_complex,
)
from .modes import (
    ModeDecomposition,
    fourier_modes,
    harmonic_rotation_pq,
    modified_hamiltonian,
    word_basis_function,
    word_hamiltonian,
    word_series_evaluate,
)
from .systems import (
    MechanicalSystem,
    TrajectoryRecord,
    action_angle_transform,
    energy_error_scan,
    forced_oscillator,
    fpu5,
    fpu_frequencies,
    integrate_splitting,
    normalize_linear_part,
    observable_drift,
    reference_trajectory,
)

__version__ = "0.1.0"
