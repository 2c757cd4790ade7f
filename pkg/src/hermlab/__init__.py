"""Numerical laboratory for Hermitian surface geometry.

Metrics are entered as closed-form expressions in (z1, z2, zb1, zb2), carried
to second order by Wirtinger jets, and used to evaluate curvature, torsion,
differential-form operators and global integral identities on a flat torus or
a Hopf surface.
"""
from .checks import (
    REGISTRY,
    CheckResult,
    Diagnostics,
    chern_number,
    classify,
    compute_integrals,
    norms_2tensor,
    run_integral_suite,
    run_pointwise_suite,
)
from .domains import DomainModel, QuadratureError, build_rule, deck_invariance_check, global_inner, volume
from .expr import ExprError, MetricField, load_metric, parse, unparse
from .forms import DEFAULT, Conventions, Dashboard, derived_dashboard
from .gallery import GALLERY_IDS, gallery_metric, gallery_toml, linear_pullback, rescaled
from .geometry import PointFrame, compute_frame, frame_from_metric, metric_at
from .jets import Jet, fd_oracle

__version__ = "0.1.0"
