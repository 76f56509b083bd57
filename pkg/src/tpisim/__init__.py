"""Two-photon interference of long-coherence single photons in an
asymmetric Mach-Zehnder interferometer: closed-form correlations, a
path-amplitude cross-check, synthetic detector streams and a time-tag
correlator."""
from .analytic import (
    CorrelationSeries,
    FeatureKind,
    SideFeature,
    SideLocation,
    beat_visibility,
    classify_side_feature,
    exact_side_threshold,
    g2_cross,
    g2_parallel,
    normalization,
    sample_series,
    side_threshold,
    visibility,
    visibility_zero,
)
from .correlator import CorrelationHistogram, CorrelatorConfig, Normalization, correlate, correlate_batched
from .model import (
    CqedParams,
    InterferometerConfig,
    PolarizationMode,
    SourceModel,
    cooperativity,
    critical_photon_number,
    fibre_delay,
    g1_magnitude,
    g2_auto,
)
from .oracle import oracle_g2
from .tagio import read_tags, write_tags
from .tags import TagStream
from .tagsim import SimConfig, generate_antibunched_renewal, generate_pair_correlated, generate_poisson

__version__ = "0.1.0"
