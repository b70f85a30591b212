from .base import (
    ConfigurationError,
    DetectionResult,
    DetectorKind,
    Modulation,
    NomaError,
    ResourceError,
    Source,
    UsageError,
)
from .bound import (
    CompositeDistanceSet,
    DistanceMatrixPam,
    DistanceMatrixQam,
    GammaSpectrum,
    avg_q_over_fading,
    ber_bound,
    bound_curve,
    brute_force_distances,
    chi_square_pdf,
    composite_distance_vectors,
    conditional_union_bound,
    gamma_spectrum,
    pam_all_distances,
    pam_half_distances,
    q_function,
    qam_all_distances,
    qam_half_distances,
)
from .channel import (
    ChannelRealization,
    Scenario,
    UserSpec,
    add_noise,
    sample_channel,
    superimpose,
)
from .collection import DetectorCollection
from .constellation import (
    Constellation,
    PamConstellation,
    QamConstellation,
    build_pam,
    build_qam,
    map_bits,
    symbol_bits,
)
from .curve import BerCurve, BerPoint, emit_curve, fit_diversity_slope, load_curve, wilson_interval
from .detection import JointMLDetector, SicOrdering, SICDetector, composite_points, jmld_detect, sicd_detect
from .montecarlo import SimPlan

__all__ = [
    "BerCurve",
    "BerPoint",
    "ChannelRealization",
    "CompositeDistanceSet",
    "ConfigurationError",
    "Constellation",
    "DetectionResult",
    "DetectorCollection",
    "DetectorKind",
    "DistanceMatrixPam",
    "DistanceMatrixQam",
    "GammaSpectrum",
    "JointMLDetector",
    "Modulation",
    "NomaError",
    "PamConstellation",
    "QamConstellation",
    "ResourceError",
    "SICDetector",
    "Scenario",
    "SicOrdering",
    "SimPlan",
    "Source",
    "UsageError",
    "UserSpec",
    "add_noise",
    "avg_q_over_fading",
    "ber_bound",
    "bound_curve",
    "brute_force_distances",
    "build_pam",
    "build_qam",
    "chi_square_pdf",
    "composite_distance_vectors",
    "composite_points",
    "conditional_union_bound",
    "emit_curve",
    "fit_diversity_slope",
    "gamma_spectrum",
    "jmld_detect",
    "load_curve",
    "map_bits",
    "pam_all_distances",
    "pam_half_distances",
    "q_function",
    "qam_all_distances",
    "qam_half_distances",
    "sample_channel",
    "sicd_detect",
    "superimpose",
    "symbol_bits",
    "wilson_interval",
]
