from .arrays import ArrayGeometry, band_steering, spatial_steering, steering_matrix
from .steering import (DelayOperator, delay_operator, full_band_steering, space_time_steering,
                       temporal_steering)
