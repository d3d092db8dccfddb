"""Hahn-Exton q-Bessel calculus: special functions, Jackson integrals, the
q-Bessel Fourier transform, translation kernels and numerical identity checks.
"""

from .errors import (
    ConvergenceError,
    DomainError,
    NoSignChangeError,
    PoleError,
    QBesselError,
    WindowTooSmallError,
)
from .kernels import ABranchParams, function_A, kernel_D, kernel_E, kernel_T
from .positivity import AtlasRow, IndexBox, ScanSpec, find_q0, find_q1, scan_Q
from .qbessel import Base, J_hahn_exton, c_qv, j_normalized, phi_v, prop1_bound
from .qcore import LatticeFunction, NormSpec, QContext, bilateral_sum, jackson_integral, qpochhammer
from .qtransform import TransformPlan, convolve, fourier, translate_kernel, translate_spectral
from .reports import VerificationReport

__version__ = "0.1.0"
