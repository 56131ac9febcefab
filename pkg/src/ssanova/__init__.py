"""Spatial-sign k-sample tests for functional data, with mean-based baselines."""
from .baselines import cff_test, f_type_test, fmax_test, gpf_test, hr_test, pointwise_f, zc_test
from .errors import DataError, DegenerateEstimatorError, NumericalError
from .grid import GridDomain, GridFunction, HTuple, inner_product, l2_norm
from .inference import (TestReport, asymptotic_test, bootstrap_test, exact_permutation_test,
                        permutation_test)
from .processes import ProcessSpec, ShiftSpec, generate_grouped, shift_functions, simulate_paths
from .sample import GroupedSample
from .signs import spatial_rank, spatial_sign, ss_statistic

__version__ = "0.1.0"
