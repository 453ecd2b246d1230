"""Functional sliced inverse regression in the enlarged space R(Gamma^{-1/2})."""

from .basis import BasisSpec, FunctionCoef, analyze, synthesize
from .dataset import FunctionalDataset, Sample
from .estimate import (
    FsirResult,
    SliceMeans,
    SliceSpec,
    SlicingError,
    between_slice_covariance,
    classify,
    empirical_covariance,
    fit_fsir,
    fsir_solve,
    gamma_cosine,
    grand_mean_center,
    slice_mean_representer,
    slice_means,
    slice_partition,
    subspace_distance,
)
from .operators import (
    EmptySpectrumError,
    KernelOnGrid,
    NotInRKHSError,
    SpectralOperator,
    apply,
    hgamma_inner,
    mercer_decompose,
    operator_norm,
    power,
    trace,
    trace_from_kernel,
    whitened_conjugate,
)
from .simulate import (
    ExampleSpec,
    analytic_error_rate,
    gen_example,
    oracle_beta,
    oracle_kernels,
    rayleigh_ratio,
    sample_process,
)

__version__ = "0.1.0"
