"""Category Utility and rival category-goodness measures over nominal data."""

from catutil.clustering import (
    MergeTrace,
    Partitioning,
    best_split_exhaustive,
    greedy_agglomerate,
    hierarchy_from_merges,
    hierarchy_from_partitioning,
    partition_objective,
)
from catutil.dataset import (
    AttributeSchema,
    Category,
    Dataset,
    DatasetError,
    Dimension,
    Distribution,
    Hierarchy,
    HierarchyError,
    Instance,
    Level,
    conditional_distribution,
    dataset_to_csv,
    hierarchy_to_json,
    make_hierarchy,
    parse_category,
    parse_dataset,
    parse_hierarchy,
    validate_hierarchy,
)
from catutil.game import GameCondition, ScoreEstimate, Strategy, closed_form_score, empirical_gain, simulate
from catutil.hierarchy import (
    MEASURE_IDS,
    BasicLevelPrediction,
    MeasureReport,
    level_report,
    ordering,
    predict_basic_level,
    report_to_json,
    report_to_tsv,
)
from catutil.measures import (
    FeatureRule,
    MeasureOptions,
    RivalMeasures,
    cu_info_category,
    cu_info_partition,
    cu_quad_category,
    cu_quad_partition,
    rival_measures,
    uncertainty,
)

__all__ = [name for name in dir() if not name.startswith("_") and name not in {"clustering", "dataset", "game", "hierarchy", "measures"}]
