"""Tag-propagation video representations for zero- and few-example event detection.

The pipeline: build a :class:`~tagbook.corpus.SourceCorpus` from socially
tagged videos, optionally refine its labels with :func:`~tagbook.propagation.refine_source`,
propagate tag vectors for unlabeled videos with :func:`~tagbook.propagation.propagate`,
model events (:func:`~tagbook.events.zero_example_model` /
:func:`~tagbook.events.train_few_example`), rank by cosine, and evaluate with
AP / MAP and ROUGE-1. A synthetic planted-event generator
(:func:`~tagbook.synth.synth_corpus`) supports desk-scale experiments.
"""

from .corpus import (
    Annotation,
    SourceCorpus,
    TagVocabulary,
    binary_label,
    build_corpus,
    build_vocabulary,
    load_corpus,
    load_corpus_dir,
    load_stoplist,
    save_corpus,
    tokenize_caption,
)
from .errors import TagbookError
from .events import (
    EventModel,
    LabeledSet,
    RankedList,
    SvmConfig,
    load_model,
    rank_videos,
    save_model,
    score,
    train_few_example,
    zero_example_model,
)
from .evaluation import (
    Description,
    GroundTruth,
    average_precision,
    describe_video,
    mean_average_precision,
    rouge1_recall,
)
from .propagation import (
    PropagationConfig,
    load_relevance,
    neighbor_weight,
    propagate,
    propagate_batch,
    refine_source,
    save_relevance,
)
from .reduction import (
    PcaModel,
    ReducedVocabulary,
    load_pca,
    load_reduced_vocabulary,
    pca_fit,
    pca_project,
    project_vocabulary,
    save_pca,
    save_reduced_vocabulary,
    select_frequent,
)
from .similarity import (
    NeighborList,
    all_similarities,
    average_pool_frames,
    cosine_similarity,
    knn,
)
from .synth import SynthDataset, SynthSpec, synth_corpus

__version__ = "0.1.0"

__all__ = [
    "Annotation",
    "Description",
    "EventModel",
    "GroundTruth",
    "LabeledSet",
    "NeighborList",
    "PcaModel",
    "PropagationConfig",
    "RankedList",
    "ReducedVocabulary",
    "SourceCorpus",
    "SvmConfig",
    "SynthDataset",
    "SynthSpec",
    "TagVocabulary",
    "TagbookError",
    "all_similarities",
    "average_pool_frames",
    "average_precision",
    "binary_label",
    "build_corpus",
    "build_vocabulary",
    "cosine_similarity",
    "describe_video",
    "knn",
    "load_corpus",
    "load_corpus_dir",
    "load_model",
    "load_pca",
    "load_reduced_vocabulary",
    "load_relevance",
    "load_stoplist",
    "mean_average_precision",
    "neighbor_weight",
    "pca_fit",
    "pca_project",
    "project_vocabulary",
    "propagate",
    "propagate_batch",
    "rank_videos",
    "refine_source",
    "rouge1_recall",
    "save_corpus",
    "save_model",
    "save_pca",
    "save_reduced_vocabulary",
    "save_relevance",
    "score",
    "select_frequent",
    "synth_corpus",
    "tokenize_caption",
    "train_few_example",
    "zero_example_model",
]
