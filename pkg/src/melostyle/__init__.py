"""Melodic style analysis of vocal improvisation clips.

Extracts contour, histogram and timbre features from tonic-referenced pitch
tracks (plus optional energy and audio), classifies clips into Hindustani,
Carnatic or Turkish style, ranks features by information gain, and compares
classifier labels against listener judgments.
"""

from .agreement import (
    CorrelationResult,
    LabeledConfidence,
    aggregate_listeners,
    classifier_confidence,
    label_correlation,
)
from .audio import (
    AudioClip,
    MfccSummary,
    decode_wav,
    harmonic_energy,
    mfcc,
    synthesize_stimulus,
    write_wav,
)
from .contour import (
    ErSeries,
    Segmentation,
    energy_ratio_series,
    gamak_measure,
    haar_approximation,
    melodic_transitions,
    segment_contour,
    stable_note_measure,
    tremolo_feature,
)
from .dataio import (
    CentsTrack,
    ClipRecord,
    EnergyContour,
    ListenerResponse,
    PitchTrack,
    STYLES,
    load_dataset,
    load_energy_contour,
    load_pitch_track,
    load_responses,
    to_cents,
    write_energy_contour,
    write_manifest,
    write_pitch_track,
)
from .errors import (
    AlignmentError,
    ConfigError,
    DataAnomalyError,
    FormatError,
    MelostyleError,
    MissingDataError,
    NumericError,
    UndefinedFeatureError,
    UnsupportedFormatError,
    ValidationError,
)
from .features import (
    FEATURE_REGISTRY,
    FEATURE_SUBSETS,
    ClipData,
    ClipFeatureExtractor,
    FeatureTable,
    FeatureVector,
    extract_clip_features,
    feature_vectors_to_table,
    load_clip_data,
    load_feature_table,
    write_feature_table,
)
from .histogram import (
    PeakSet,
    PitchHistogram,
    build_histogram,
    ed,
    fold_deviation,
    mipd,
    mpd,
    pick_peaks,
    tonic_distance,
    wpd,
)
from .learn import (
    CvReport,
    KnnVoteClassifier,
    QuadraticGaussianClassifier,
    cross_validate,
    information_gain,
    rank_features,
)
from .synthcorpus import StyleArchetype, default_archetype, generate_clip, generate_corpus

__version__ = "0.1.0"
