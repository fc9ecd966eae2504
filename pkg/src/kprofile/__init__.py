"""kappa-profiles: secant-preserving projections as a dimension statistic."""

__version__ = "0.1.0"

from .basis import ProjectionBasis
from .delay import DelayConfig, ProfileSeries, TimeSeriesCube, delay_embed, monitor, takens_min_length
from .errors import *  # noqa: F401,F403
from .sap import (GOOD_KAPPA, KappaProfile, ProfileEntry, SapConfig, SapResult, good_dimension,
                  is_good_embedding, kappa_profile, profile_data, sap_optimize)
from .secants import DataMatrix, SecantSet, build_secants, min_projected_norm, span_reduce
from .subspace import PrincipalAngles, SingularSpectrum, geodesic_distance, pca_basis, principal_angles
