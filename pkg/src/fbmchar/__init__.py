"""fbmchar: fractional Brownian motion simulation, fundamental-martingale
transforms, and statistical verification of the fBm characterization
properties on uniform grids."""

from ._validation import DegeneratePathError, NumericalError
from .characterize import (
    CharacterizationVerdict,
    FbmCharacterizationTest,
    PropertyReport,
    StatisticCheck,
    Thresholds,
    characterization_verdict,
    test_property_a,
    test_property_b,
    test_property_c,
)
from .estimators import (
    EstimateWithCI,
    HolderExponentEstimator,
    PowerLawFit,
    gaussian_abs_moment,
    holder_exponent_estimate,
    p_variation,
    powerlaw_fit,
    weighted_qv,
    weighted_qv_tail,
)
from .generate import (
    FbmGenerator,
    circulant_eigenvalues,
    fbm_covariance,
    fbm_covariance_matrix,
    fgn_autocovariance,
    generate_cholesky,
    generate_davies_harte,
)
from .grid import BracketPath, HurstIndex, PathEnsemble, SamplePath, TimeGrid
from .kernels import (
    KernelConstants,
    PartitionContext,
    abel_const,
    beta_b1,
    molchan_kernel,
    partition_kernel_f,
    partition_kernel_g_p,
    repxm_kernel,
    z_kernel,
)
from .report import ReportDocument, emit_report, read_paths_csv, read_report, write_paths_csv
from .transforms import (
    ProcessTransform,
    empirical_bracket,
    fundamental_martingale,
    fundamental_martingale_via_y,
    rs_integrate,
    w_process,
    x_from_m_high,
    x_from_w_low,
    x_from_y,
    y_from_m_abel,
    y_process,
)

__version__ = "0.1.0"

__all__ = [
    "BracketPath",
    "CharacterizationVerdict",
    "DegeneratePathError",
    "EstimateWithCI",
    "FbmCharacterizationTest",
    "FbmGenerator",
    "HolderExponentEstimator",
    "HurstIndex",
    "KernelConstants",
    "NumericalError",
    "PartitionContext",
    "PathEnsemble",
    "PowerLawFit",
    "ProcessTransform",
    "PropertyReport",
    "ReportDocument",
    "SamplePath",
    "StatisticCheck",
    "Thresholds",
    "TimeGrid",
    "abel_const",
    "beta_b1",
    "characterization_verdict",
    "circulant_eigenvalues",
    "emit_report",
    "empirical_bracket",
    "fbm_covariance",
    "fbm_covariance_matrix",
    "fgn_autocovariance",
    "fundamental_martingale",
    "fundamental_martingale_via_y",
    "gaussian_abs_moment",
    "generate_cholesky",
    "generate_davies_harte",
    "holder_exponent_estimate",
    "molchan_kernel",
    "p_variation",
    "partition_kernel_f",
    "partition_kernel_g_p",
    "powerlaw_fit",
    "read_paths_csv",
    "read_report",
    "repxm_kernel",
    "rs_integrate",
    "test_property_a",
    "test_property_b",
    "test_property_c",
    "w_process",
    "weighted_qv",
    "weighted_qv_tail",
    "write_paths_csv",
    "x_from_m_high",
    "x_from_w_low",
    "x_from_y",
    "y_from_m_abel",
    "y_process",
    "z_kernel",
]
