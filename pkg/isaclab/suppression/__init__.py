from .slowtime import SlowTimeFilter, mti_response, rma_response, slow_time_filter
from .spatial import spatial_combiner
from .stap import (StapWeights, cov_driven_stap, dft_beamspace_basis, effective_steering,
                   principal_subspace, sftap_weights, stap_weights, target_covariance,
                   transmit_statistics)
from .maps import AngleDopplerMap, angle_doppler_map, beampattern
