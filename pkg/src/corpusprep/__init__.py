"""Corpus preparation for sequence-to-sequence NMT pre-training with assisting languages."""

from .core import (
    LengthDistribution,
    SelectionReport,
    Sentence,
    compute_length_distribution,
    corpus_stats,
)
from .filtering import FilterRule, cjk_ratio_filter, nfkc_normalize, run_filter_pipeline, token_length_filter
from .mass import MaskConfig, MassExample, generate_mass_examples, verify_example
from .mixing import LanguageCorpus, oversample_mix, oversample_mix_lines
from .ngram import NGramModel, SentenceScore, export_arpa, import_arpa, train
from .recipe import PipelineRecipe, load_recipe, run_recipe, validate_recipe
from .script_map import MappingConfig, MappingTable, load_mapping_table, map_lm_scored, map_one_to_one
from .selection import (
    SelectionSpec,
    select_combined,
    select_length_distribution,
    select_lm_top_n,
    select_random,
)

__version__ = "0.1.0"
