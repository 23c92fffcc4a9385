"""Joint multilingual ASR + LID evaluation core for Amharic, Tigrinya, Oromo,
Sidaama and Wolaytta: grapheme vocabulary, CTC likelihood and decoding,
script-aware normalization and scoring."""

from .ctc import collapse_path, ctc_brute_force, ctc_log_likelihood, greedy_decode
from .metrics import (
    BootstrapResult,
    ScoredPair,
    cer,
    checkpoint_score,
    edit_distance,
    gender_strata,
    lid_accuracy,
    paired_bootstrap,
    score_pair,
    wer,
)
from .normalize import NormalizationConfig, apply_pipeline
from .vocab import LANGUAGES, GraphemeVocab, TargetSequence, VocabConfig, build_vocab, decode_ids, encode_target

__version__ = "0.1.0"
