"""Bucket elimination and AND/OR search over a shared context-minimal graph.

Both engines record which bucket tuples they touch, so their explored
search spaces can be compared directly.
"""

from .analysis import (
    Comparison,
    SizeGuardError,
    brute_force_value,
    build_cm,
    compare,
    export_dot,
    oracle_explored_sets,
)
from .aosearch import AoOptions, ao_bf, ao_df, arc_label
from .elimination import VeOptions, collapse_dead_chains, run_ve, run_ve_lah
from .model import Domain, Factor, Model, ModelFormatError, Task, parse_model, render_model
from .report import Backbone, NodeKey, RunReport, TupleKey
from .structure import PseudoTree, build_bucket_tree, contexts, pseudo_tree_of, tree_stats

__all__ = [
    "AoOptions", "Backbone", "Comparison", "Domain", "Factor", "Model", "ModelFormatError",
    "NodeKey", "PseudoTree", "RunReport", "SizeGuardError", "Task", "TupleKey", "VeOptions",
    "ao_bf", "ao_df", "arc_label", "brute_force_value", "build_bucket_tree", "build_cm",
    "collapse_dead_chains", "compare", "contexts", "export_dot", "oracle_explored_sets",
    "parse_model", "pseudo_tree_of", "render_model", "run_ve", "run_ve_lah", "tree_stats",
]
