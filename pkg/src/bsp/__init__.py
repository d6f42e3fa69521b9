"""Discovery of stable bimodules between two sample-matched data matrices."""

__version__ = "0.1.0"

from .corr import View, cross_corr_block, intra_eigenvalues, r2_profile, r2_sum
from .errors import BSPError, DataError, PreconditionError
from .fdr import by_threshold
from .matrix import TwoViewDataset, load_dataset, make_dataset, prepare, residualize, standardize
from .network import connectivity_threshold, essential_edges, net_stats
from .overlap import effective_number, jaccard_distance, select_representatives
from .pipeline import discover
from .pvalues import fit_shifted_gamma, moments_from_eigenvalues, pvalue
from .search import Bimodule, SearchConfig, final_filter, half_update, run_all, search_from
from .simulate import generate_dataset, population_bimodules
from .tuning import choose_alpha, half_permute

__all__ = [
    "Bimodule", "BSPError", "DataError", "PreconditionError", "SearchConfig",
    "TwoViewDataset", "View", "by_threshold", "choose_alpha", "connectivity_threshold",
    "cross_corr_block", "discover", "effective_number", "essential_edges", "final_filter",
    "fit_shifted_gamma", "generate_dataset", "half_permute", "half_update",
    "intra_eigenvalues", "jaccard_distance", "load_dataset", "make_dataset",
    "moments_from_eigenvalues", "net_stats", "population_bimodules", "prepare",
    "pvalue", "r2_profile", "r2_sum", "residualize", "run_all", "search_from",
    "select_representatives", "standardize",
]
