"""Semi-supervised HSIC projections with probabilistic labels."""

__version__ = "0.1.0"

from .dataset import (
    LabelAssignment,
    SplitSpec,
    generate_blobs,
    generate_two_moons,
    load_csv,
    make_split,
    mask_labels,
    normalize_to_unit_ball,
    save_csv,
)
from .kernels import KernelSpec, centering_matrix, cross_gram, delta_kernel, gram
from .labeling import (
    LabelingConfig,
    assign_probabilistic_labels,
    one_hot,
    winner_take_all,
    wta_error_rate,
)
from .objective import empirical_hsic, objective_frobenius, objective_trace
from .solver import (
    FitConfig,
    KernelProjection,
    LinearProjection,
    fit_kernel,
    fit_linear,
    fit_pca,
    symmetric_top_eigenpairs,
    transform,
)
from .bound import BoundReport, deviation_bound, empirical_gap, one_nn_refined_bound, theorem3_bound

__all__ = [name for name in dir() if not name.startswith("_")]
