from .estimate import (CovEstimate, range_gate_snapshots, regularize, sample_covariance,
                       sirv_estimate, subband_sets, subband_width, tyler_shape)
from .hot import hot_clutter_cov, hot_covariance_block
from .kernel import (ClutterKernel, clutter_cov_from_scene, learn_inner_kernel,
                     predict_clutter_cov, space_time_kernel, spatial_kernel)
from .structured import select_rank, structured_fit
