"""Hardy-space operators on a discretized real line.

Submodules: ``grid`` (sampling and the unitary transform), ``operators``
(projections, Hilbert, Toeplitz/Hankel, smoothing), ``spaces`` (H1 norms,
the subspace H1_Theta, band decomposition, atoms, BMO), ``experiments``
and ``cli``.
"""
from .errors import (
    BadNormalizer, DegenerateProfiles, EmptyFamily, FrequencyOffGrid, GridMismatch,
    HardylineError, IntervalTooSmall, InvalidParameter, NonzeroMeanWarning, NotInSubspace,
    PreconditionViolation, WraparoundRisk, WraparoundWarning,
)
from .grid import (
    GridSpec, SampledFunction, SpectralFunction, forward_fourier, inverse_fourier, l1_norm,
    load_function, make_grid, pairing, save_function,
)
from .descriptors import synthesize
from .operators import (
    ModulationSymbol, band_regularize, commutator_bH, hankel_apply, hilbert, modulate,
    project_minus, project_plus, smooth_lowpass, toeplitz_apply,
)
from .spaces import (
    band_decompose, bmo_estimate, h1_norm, make_atom, make_b_atom, membership_report,
    oscillation_on, project_to_h1_theta,
)

__version__ = "0.1.0"
