"""Kernel-smoothed gradients for model explanation.

Smooths a function's gradient by convolving it with a symmetric kernel and
estimates the result by Monte Carlo, sampling from the kernel itself so
every importance weight is exactly 1. Three smoothing modes (input noise,
parameter noise, and their full cross product), five kernels with analytic
inverse CDFs, closed-form bandwidth selection, quadrature oracles for
verification, and rank-based explanation-quality metrics.
"""

__version__ = "0.1.0"

from .errors import (AllZeroInput, CapabilityMissing, ConfigInvalid,
                     ConvergenceFailure, DataError, DegenerateInput,
                     DimensionMismatch, DomainError, MolligradError,
                     NonFiniteGradient)
from .kernels import (KERNEL_KINDS, Kernel, closed_form_epsilon,
                      epsilon_residual, quoted_closed_form_epsilon,
                      solve_epsilon)
from .sampling import (RngState, SampleBatch, derive_seed, draw_batch,
                       ks_critical, ks_statistic)
from .models import (MlpModel, ToyFunction, blobs_dataset, make_linear,
                     train_logistic)
from .estimator import (MollifiedGradient, MollifiedValue, SmoothingConfig,
                        convergence_study, smooth_gradient, smooth_value)
from .metrics import (BoundingBox, MetricReport, consistency_metric, gini,
                      invariance_metric, point_game, spearman)
from . import harness, oracle

__all__ = [
    "__version__",
    "MolligradError", "DomainError", "ConfigInvalid", "DataError",
    "DimensionMismatch", "CapabilityMissing", "NonFiniteGradient",
    "DegenerateInput", "AllZeroInput", "ConvergenceFailure",
    "KERNEL_KINDS", "Kernel", "solve_epsilon", "closed_form_epsilon",
    "quoted_closed_form_epsilon", "epsilon_residual",
    "RngState", "SampleBatch", "draw_batch", "derive_seed",
    "ks_statistic", "ks_critical",
    "MlpModel", "ToyFunction", "make_linear", "blobs_dataset",
    "train_logistic",
    "SmoothingConfig", "MollifiedGradient", "MollifiedValue",
    "smooth_gradient", "smooth_value", "convergence_study",
    "spearman", "gini", "BoundingBox", "point_game", "MetricReport",
    "consistency_metric", "invariance_metric",
    "harness", "oracle",
]
