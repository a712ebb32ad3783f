"""Channel-pruning decision engine.

Clusters each conv layer's filters with Ward agglomeration, picks the
cluster count by mean silhouette, keeps one representative filter per
surviving cluster, and propagates the decisions through the layer graph
into sliced weights plus FLOPs/params accounting. Magnitude and
geometric-median selection rules are included as baselines.
"""

from .analysis import (
    SimilarityReport,
    cosine_similarity,
    lambda_sweep,
    similarity_report,
)
from .compression import (
    CompressionReport,
    CostReport,
    PruningPlan,
    apply_plan,
    apply_plan_to_specs,
    build_plan,
    compression_report,
    count_flops,
    plan_from_counts,
    plan_from_ratios,
)
from .container import (
    FilterMatrix,
    LayerSpec,
    ModelSnapshot,
    TensorRecord,
    filters_of,
    read_container,
    read_snapshot,
    write_container,
    write_snapshot,
)
from .criteria import (
    Criterion,
    geometric_median,
    median_distances,
    norm_scores,
    select_by_criterion,
)
from .election import (
    ElectionConfig,
    LayerElection,
    elect_layer,
    elect_model,
    elect_representative,
    k_range,
    select_k,
)
from .errors import (
    AddConflictError,
    BadMagicError,
    ContainerError,
    GraphError,
    HeaderError,
    InvalidSnapshotError,
    KeepOutOfRangeError,
    KOutOfRangeError,
    NonFiniteTensorError,
    NotConvLayerError,
    RepruneError,
    ShapeMismatchError,
    SingleClusterError,
    SingletonClusterError,
    TensorSizeError,
    TruncatedPayloadError,
    UnknownClusterError,
    UnknownLayerError,
    UnsupportedVersionError,
    WeiszfeldNonConvergence,
)
from .hierarchy import (
    ClusterAssignment,
    Dendrogram,
    Merge,
    agglomerate,
    cut,
    pairwise_sq_distances,
    ward_merge_cost,
)
from .silhouette import (
    SilhouetteReport,
    cohesion,
    separation,
    silhouette_filter,
    silhouette_report,
)

__version__ = "0.1.0"

__all__ = [
    "AddConflictError",
    "BadMagicError",
    "ClusterAssignment",
    "CompressionReport",
    "ContainerError",
    "CostReport",
    "Criterion",
    "Dendrogram",
    "ElectionConfig",
    "FilterMatrix",
    "GraphError",
    "HeaderError",
    "InvalidSnapshotError",
    "KOutOfRangeError",
    "KeepOutOfRangeError",
    "LayerElection",
    "LayerSpec",
    "Merge",
    "ModelSnapshot",
    "NonFiniteTensorError",
    "NotConvLayerError",
    "PruningPlan",
    "RepruneError",
    "ShapeMismatchError",
    "SilhouetteReport",
    "SimilarityReport",
    "SingleClusterError",
    "SingletonClusterError",
    "TensorRecord",
    "TensorSizeError",
    "TruncatedPayloadError",
    "UnknownClusterError",
    "UnknownLayerError",
    "UnsupportedVersionError",
    "WeiszfeldNonConvergence",
    "agglomerate",
    "apply_plan",
    "apply_plan_to_specs",
    "build_plan",
    "cohesion",
    "compression_report",
    "cosine_similarity",
    "count_flops",
    "cut",
    "elect_layer",
    "elect_model",
    "elect_representative",
    "filters_of",
    "geometric_median",
    "k_range",
    "lambda_sweep",
    "median_distances",
    "norm_scores",
    "pairwise_sq_distances",
    "plan_from_counts",
    "plan_from_ratios",
    "read_container",
    "read_snapshot",
    "select_by_criterion",
    "select_k",
    "separation",
    "silhouette_filter",
    "silhouette_report",
    "similarity_report",
    "ward_merge_cost",
    "write_container",
    "write_snapshot",
]
