from .ranging import RangeDopplerMap, derandomize, range_doppler_map, range_focus
from .detection import DetectionReport, detect, glrt, glrt_direct
