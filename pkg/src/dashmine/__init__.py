"""dashmine: mine dashboard design rules and recommend view arrangement/coordination."""

from dashmine.corpus import (
    Coordination,
    DashboardSpec,
    DataField,
    GridArrangement,
    SpecError,
    StatsReport,
    ViewSpec,
    corpus_stats,
    load_corpus_dir,
    normalize_to_grid,
    parse_dashboard,
    serialize_dashboard,
)
from dashmine.features import (
    FeatureRegistry,
    FeatureVector,
    RawFeatures,
    binarize,
    build_registry,
    extract_pairwise,
    extract_single_view,
)
from dashmine.mining import (
    DecisionRule,
    Literal,
    Mapping,
    RuleSet,
    evaluate_rules,
    generate_candidate_rules,
    mine_all,
    render_rule,
    split_corpus,
)
from dashmine.recommender import (
    Candidate,
    enumerate_tilings,
    optimize_coordination,
    recommend,
    score_full,
)

__version__ = "0.1.0"

__all__ = [
    "Candidate",
    "Coordination",
    "DashboardSpec",
    "DataField",
    "DecisionRule",
    "FeatureRegistry",
    "FeatureVector",
    "GridArrangement",
    "Literal",
    "Mapping",
    "RawFeatures",
    "RuleSet",
    "SpecError",
    "StatsReport",
    "ViewSpec",
    "binarize",
    "build_registry",
    "corpus_stats",
    "enumerate_tilings",
    "evaluate_rules",
    "extract_pairwise",
    "extract_single_view",
    "generate_candidate_rules",
    "load_corpus_dir",
    "mine_all",
    "normalize_to_grid",
    "optimize_coordination",
    "parse_dashboard",
    "recommend",
    "render_rule",
    "score_full",
    "serialize_dashboard",
    "split_corpus",
]
