"""LOOP and related 3x3 binary texture descriptors.

Hot per-pixel kernels run in a compiled extension when it is built and in
a vectorised numpy fallback otherwise; :data:`BACKEND` names the one in use.
"""

from . import _backend
from .classify import CRC, FoldPlan, LabeledSet, chi2_distance, crc_classify, cross_validate, load_dataset, make_folds, nn_classify
from .descriptor import Descriptor, describe, histogram
from .kernels import (
    KINDS,
    Patch3,
    code_map,
    kirsch_responses,
    lbp_code,
    ldp_code,
    ldp_ri_code,
    lgp_code,
    loop_code,
    mct_code,
    rank_exponents,
    tie_break,
)
from .raster import PGMError, build_pyramid, gaussian_blur, load_pgm, save_pgm
from .stats import AccuracyRecord, SignTestResult, binom_one_tail, bonferroni, sign_test

BACKEND = _backend.DEFAULT.NAME

__version__ = "0.1.0"
