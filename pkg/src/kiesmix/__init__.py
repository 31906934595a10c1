"""Kies distributions on (0, 1) and their discrete and compound mixtures.

The scale ``lam`` of the Kies law ``H(t) = 1 - exp(-lam (t/(1-t))**beta)`` is
randomised by a mixing law; the mixture CCDF is then the moment generating
function of ``lam`` at ``-(t/(1-t))**beta``.  The package provides the base
law, the mixing laws, the mixtures, their Hausdorff saturation, exact
sampling and a histogram calibration pipeline.
"""

from .kies import (
    KiesParams,
    ShapeCase,
    ShapeReport,
    classify_shape,
    kies_ccdf,
    kies_cdf,
    kies_pdf,
    kies_quantile,
)
from .laws import (
    Affine,
    BetaLaw,
    Binomial,
    Degenerate,
    DiscreteTable,
    Exponential,
    Gamma,
    Geometric,
    MixingLaw,
    ShiftedBinomial,
    law_from_dict,
)
from .mixture import (
    InvalidModelError,
    MixedKies,
    ValidityReport,
    left_endpoint,
    mix_ccdf,
    mix_cdf,
    mix_pdf,
    right_endpoint,
    validate,
)
from .saturation import (
    SaturationResult,
    saturation_algorithm1,
    saturation_exponential_closed,
    saturation_fixed_point,
)
from .sampling import SampleBatch, mix_quantile, sample

__all__ = [
    "KiesParams",
    "ShapeCase",
    "ShapeReport",
    "classify_shape",
    "kies_cdf",
    "kies_ccdf",
    "kies_pdf",
    "kies_quantile",
    "MixingLaw",
    "Degenerate",
    "DiscreteTable",
    "ShiftedBinomial",
    "Binomial",
    "Geometric",
    "Exponential",
    "Gamma",
    "BetaLaw",
    "Affine",
    "law_from_dict",
    "InvalidModelError",
    "MixedKies",
    "ValidityReport",
    "validate",
    "mix_cdf",
    "mix_ccdf",
    "mix_pdf",
    "left_endpoint",
    "right_endpoint",
    "SaturationResult",
    "saturation_fixed_point",
    "saturation_algorithm1",
    "saturation_exponential_closed",
    "SampleBatch",
    "mix_quantile",
    "sample",
]
