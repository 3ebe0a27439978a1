"""Dataset reliability assessment for analogy-based software effort estimation."""

__version__ = "0.1.0"

from .analogy import (  # noqa: E402
    Prediction,
    ValidationResult,
    brute_force_select,
    jackknife_validate,
    kfold_validate,
    predict_closest,
)
from .dataset_io import AttributeKind, Dataset, Schema, column_range, drop_missing, load_dataset  # noqa: E402
from .estimators import ClosestAnalogyRegressor, EBAPlusSelector  # noqa: E402
from .metrics import MetricSummary, mre, summarize  # noqa: E402
from .pipeline import QualityVerdict, RunConfig, run_ebaplus  # noqa: E402
from .rank_correlation import RowwiseCorr, midrank, row_kendall, rowwise_kendall  # noqa: E402
from .resampling import (  # noqa: E402
    RngConfig,
    bca_interval,
    bootstrap_corr,
    permutation_test,
    row_permutation_test,
    wilcoxon_rank_sum,
)
from .similarity import DeltaMode, SimilarityMatrix, effort_similarity_matrix, similarity_matrix  # noqa: E402
