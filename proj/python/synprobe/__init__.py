"""Targeted syntactic evaluation: suite generation, n-gram and beam scoring, statistics."""

from ._core import (
    Error,
    NGramModel,
    binom_test_above,
    binom_test_below,
    exact_marginal,
    exposure_bucket,
    fit_logistic,
    item_accuracy,
    lexicon_table,
    parse_treebank,
    pearson_test,
    run,
    wilson_ci,
    word_sync_beam,
)

__all__ = [
    "Error",
    "NGramModel",
    "binom_test_above",
    "binom_test_below",
    "exact_marginal",
    "exposure_bucket",
    "fit_logistic",
    "item_accuracy",
    "lexicon_table",
    "parse_treebank",
    "pearson_test",
    "run",
    "wilson_ci",
    "word_sync_beam",
]
