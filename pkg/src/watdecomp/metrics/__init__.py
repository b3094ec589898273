"""Evaluation metrics for decompiled C."""

from .codebleu import CodeBleu, codebleu
from .completeness import FunctionCompleteness, function_completeness, syntactic_completeness
from .cyclomatic import ccn_similarity, cyclomatic, function_complexities
from .similarity import bloat_rate, bloat_rate_text, cosine_similarity, count_lines
from .skeleton import skeleton, wat_skeleton
from .ted import aed_similarity, tree_edit_distance

ast_edit_distance = tree_edit_distance

__all__ = [
    "CodeBleu",
    "FunctionCompleteness",
    "aed_similarity",
    "ast_edit_distance",
    "bloat_rate",
    "bloat_rate_text",
    "ccn_similarity",
    "codebleu",
    "cosine_similarity",
    "count_lines",
    "cyclomatic",
    "function_completeness",
    "function_complexities",
    "skeleton",
    "syntactic_completeness",
    "tree_edit_distance",
    "wat_skeleton",
]
