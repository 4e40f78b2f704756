"""Porosity and differentiability experiments in Carnot groups."""

__version__ = "0.1.0"

from .errors import (ConstructionFailed, ExperimentInvalid, InternalError, InvalidArgument,
                     UnsupportedMetric)
from .group import (GroupLinearMap, GroupSpec, dilate, engel_spec, euclidean_spec, heisenberg_spec, inv,
                    mul, puc_tau, spec_from_json)
from .metrics import CCSettings, Metric, cc_estimate, koranyi_lower_bound, koranyi_norm, make_metric, snowflake
from .cantor import LadderIndex, Membership, ank_member, cantor_member, gap_window
from .sets import SetOracle, get_set
from .porosity import PorosityProfile, ScaleConfig, SearchConfig, classify, porosity_profile
from .whitney import Domain, WhitneyCover, cover_verify, whitney_cover
from .nondiff import BumpSpec, ScalarField, bump_make, build_nonsubdiff, quotient_scan
from .gradient import (dini_pair, directional_derivative, horizontal_gradient, pansu_residual,
                       preimage_scan, usefullemma_experiment)

__all__ = [n for n in dir() if not n.startswith("_")]
