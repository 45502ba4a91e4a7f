"""Gaussian-state covariance matrices, state reconstruction and purity.

Single-mode states, +/-Omega spectral pairs, a homodyne-measurement
simulator and a brute-force purity oracle.
"""

__version__ = "0.1.0"

from .core import (AmplitudeCM, Basis, GaussianParams, PhasePoint,
                   QuadratureCM, amplitude_cm_from_params,
                   moments_from_params, params_from_amplitude_cm,
                   params_from_quadrature_cm, purity_single,
                   validate_physicality, wigner, wigner_eval)
from .multimode import (SpectralQuadratures, TwoModeCM, TwoModeGaussianParams,
                        XYPairCM, XYPairQuadratures, assemble_two_mode_cm,
                        expand_xy_to_full_pq_cm, purity_two_mode_pq,
                        purity_xy, two_mode_params_from_xy_cm,
                        two_mode_wigner_eval, xy_cm_from_two_mode_params,
                        xy_from_pq)
