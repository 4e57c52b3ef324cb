"""Random-walk assortativity features for graph classification.

Computes covariances of node attributes seen by a stationary random walker
across multiple time scales and uses them as feature vectors for classifying
graphs with built-in SVM / random-forest cross-validation.
"""

from .attributes import (
    AttributeValue,
    betweenness,
    degree_attribute,
    identity_indicator,
    label_indicator,
    local_clustering,
    second_left_eigenvector,
    triangles_per_node,
)
from .classify import (
    AccessLog,
    CVReport,
    ModelSpec,
    cross_validate,
    multiclass_wrap,
    train_linear_svm,
    train_random_forest,
)
from .dynamics import (
    DEFAULT_TIME_GRID,
    WalkOperator,
    build_walk_operator,
    categorical_assortativity,
    dense_autocovariance_oracle,
    numeric_assortativity,
    time_grid,
    vertex_autocovariance_profile,
)
from .errors import (
    ArgumentError,
    CapacityError,
    ConvergenceError,
    DegenerateError,
    DynfeatError,
    FormatError,
    GenerationError,
)
from .features import (
    FeatureConfig,
    FeatureMatrix,
    bio_default_config,
    export_csv,
    extract_features,
    extract_fixed_vertex_features,
    fit_standardizer,
    greedy_forward_selection,
    import_csv,
    parse_config,
    social_default_config,
)
from .graphs import (
    Dataset,
    Graph,
    GraphDiagnostics,
    dataset_stats,
    diagnose,
    from_edge_list,
    generate_topology,
    load_tu_dataset,
    load_weighted_graphs,
    save_weighted_graphs,
)
from .synth import generate_fixed_vertex_dataset, generate_planted_signal_dataset

__version__ = "0.1.0"
