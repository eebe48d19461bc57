"""Variable selection and multi-order interaction discovery built from
King-rooted, weight-sampled decision forests.

A designated variable (the "King") is fixed as the root split of every tree
in its forest. Permuting the King's column on held-out rows scores each
tree, the scores reweight candidate sampling across iterations, and ranked
depth-d path lists from the final forests surface the King's d-order
interactions, which are then classified as accompanied, synergistic, or
hierarchical.
"""

from .data import (
    CLASSIFICATION,
    REGRESSION,
    DataError,
    Dataset,
    SeedContext,
    as_seed,
    load_csv,
    permute_column,
    save_csv,
)
from .forest import (
    KingForest,
    KingTree,
    Leaf,
    PathRecord,
    SplitNode,
    TreeParams,
    build_forest,
    build_tree,
    dump_tree,
    extract_paths,
    impurity_decrease,
    predict_tree,
    weighted_sample,
)
from .pvim import PvimParams, depth_profile_pvim, forest_pvims, kings_pvim
from .kings import (
    KingParams,
    KingReport,
    default_candidate_count,
    rank_variables,
    run_kings_forests,
    score_paths,
    update_weights,
)
from .ikf import (
    ACCOMPANIED,
    HIERARCHICAL,
    SYNERGISTIC,
    IkfParams,
    IkfReport,
    TypedInteraction,
    choose_first_king,
    classify_interaction,
    infer_orders,
    run_ikf,
)
from .bench import (
    DCSIS,
    IKF,
    Scenario,
    dc_sis,
    distance_correlation,
    generate,
    interaction_hit,
    model_sizes,
    mrs,
    run_experiment,
    scenario_response,
)

__version__ = "0.1.0"
