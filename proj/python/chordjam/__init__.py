"""Chord inference (HMM + Viterbi) and next-chord prediction (VOM with transition fallback)."""

import json

from ._core import (
    Chord,
    HmmModel,
    LiveSession,
    ModelError,
    ParseError,
    PitchHistogram,
    ProtocolError,
    Session,
    Song,
    TrainingSequence,
    VomTree,
    load_corpus,
    paired_t_test_one_sided,
    read_musicxml,
    settings,
    synth_corpus,
    train_model,
    viterbi,
)
from ._core import _cross_validate, _latency_benchmark

__all__ = [
    "Chord",
    "HmmModel",
    "LiveSession",
    "ModelError",
    "ParseError",
    "PitchHistogram",
    "ProtocolError",
    "Session",
    "Song",
    "TrainingSequence",
    "VomTree",
    "cross_validate",
    "latency_benchmark",
    "load_corpus",
    "paired_t_test_one_sided",
    "read_musicxml",
    "settings",
    "synth_corpus",
    "train_model",
    "viterbi",
]


def cross_validate(corpus, k=10, setting="hmm_vom_7", seed=42, alpha=0.5, vocabulary=None):
    """k-fold cross-validation of one setting; returns the report as a dict."""
    return json.loads(_cross_validate(list(corpus), k, setting, seed, alpha, vocabulary))


def latency_benchmark(bars=240, vocabulary="diatonic7", repetitions=5, seed=7):
    """Per-bar prediction latency statistics as a dict."""
    return json.loads(_latency_benchmark(bars, vocabulary, repetitions, seed))
