"""Identifiability and falsifiability diagnostics for Bayesian model expansion.

The package answers two questions about a model (or a base/expanded pair):
how much the data can tell you about the parameters, I(theta, y), and how
much room the model leaves to be proven wrong, I(theta, y_rep | y).  It
provides exact linear-Gaussian formulas, nested Monte Carlo estimators,
Fisher-information bounds on both quantities, conditional posterior
predictive checks, and a parametric-bootstrap comparison of data
augmentation schemes, all behind the `expdiag` command-line tool.
"""

from .bootstrap import SchemeComparison, compare_schemes, reference_fit
from .checks import (CheckResult, TestStatistic, check_scatter,
                     conditional_pppv, marginal_pppv, stat_constant,
                     stat_coordinate, stat_group_mean_sd,
                     stat_negated_first, stat_sample_mean, stat_window_sd)
from .errors import (CapabilityError, DomainError, ExpdiagError,
                     NumericalError, ReliabilityError)
from .fisher import (TradeoffReport, cmi_lower_bound_analytic,
                     cmi_trace_term, dilution_matrix, mi_upper_bound,
                     prior_expected_fisher, trace_bound_delta,
                     tradeoff_report)
from .gaussian import LinearGaussian
from .infotheory import (InfoEstimate, MiDecomposition, WeakIdReport,
                         estimate_cmi, estimate_psd, gaussian_entropy,
                         gaussian_mi_cmi, knn_entropy, mi_decomposition,
                         model_weak_id_verdict, weak_id_verdict)
from .models import (DataSet, ExpansionPair, ModelSpec, ParamPoint, REGISTRY,
                     builtin, builtin_pairs, grouped_variance_ratio,
                     simulate_grouped_data)
from .rand import as_generator, substream
from .samplers import PosteriorDraws, grid_posterior, sample_posterior, sample_ppd
from .suite import run_examples

__version__ = "0.1.0"

__all__ = [
    "CapabilityError", "CheckResult", "DataSet", "DomainError",
    "ExpansionPair", "ExpdiagError", "InfoEstimate", "LinearGaussian",
    "ModelSpec", "NumericalError", "ParamPoint", "PosteriorDraws",
    "REGISTRY", "ReliabilityError", "SchemeComparison", "TestStatistic",
    "TradeoffReport", "WeakIdReport", "as_generator", "builtin",
    "builtin_pairs", "check_scatter", "cmi_lower_bound_analytic",
    "cmi_trace_term", "compare_schemes", "conditional_pppv",
    "MiDecomposition", "dilution_matrix", "estimate_cmi", "estimate_psd",
    "gaussian_entropy", "gaussian_mi_cmi", "grid_posterior",
    "grouped_variance_ratio", "knn_entropy", "marginal_pppv",
    "mi_decomposition", "mi_upper_bound",
    "model_weak_id_verdict", "prior_expected_fisher", "reference_fit",
    "run_examples", "sample_posterior", "sample_ppd",
    "simulate_grouped_data", "stat_constant", "stat_coordinate",
    "stat_group_mean_sd",
    "stat_negated_first", "stat_sample_mean", "stat_window_sd",
    "substream", "trace_bound_delta", "tradeoff_report",
    "weak_id_verdict", "__version__",
]