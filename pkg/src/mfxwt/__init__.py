"""Joint multifractal analysis of two series via continuous wavelet transforms."""
from .config import AnalysisConfig, load_config
from .engine import (
    DiagonalSpectrum,
    JointSpectrum,
    MassExponentSurface,
    OrderGrid,
    PartitionTable,
    diagonal_analysis,
    direct_estimate,
    fit_mass_exponents,
    joint_partition,
    legendre_spectrum,
)
from .errors import DataError, MFXWTError, NumericalError
from .pf import box_measures, compare_wt_pf, joint_partition_pf
from .pipeline import analyze
from .surrogates import SurrogateKind, make_surrogate, shift_scan, surrogate_ensemble
from .synth import BfbmSpec, BinomialSpec, gen_bfbm, gen_bfgn, gen_binomial
from .theory import BinomialTheory, wt_theory
from .wavelet import KernelSpec, ScaleGrid, WaveletField, cwt

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig", "load_config",
    "DiagonalSpectrum", "JointSpectrum", "MassExponentSurface", "OrderGrid", "PartitionTable",
    "diagonal_analysis", "direct_estimate", "fit_mass_exponents", "joint_partition", "legendre_spectrum",
    "DataError", "MFXWTError", "NumericalError",
    "box_measures", "compare_wt_pf", "joint_partition_pf",
    "analyze",
    "SurrogateKind", "make_surrogate", "shift_scan", "surrogate_ensemble",
    "BfbmSpec", "BinomialSpec", "gen_bfbm", "gen_bfgn", "gen_binomial",
    "BinomialTheory", "wt_theory",
    "KernelSpec", "ScaleGrid", "WaveletField", "cwt",
]
