from .grid import OfdmGrid
from .amplitude import AmplitudeModel, mean_power, sample_clutter_gain, sample_sirv
from .calcs import GitParams, git_reflectivity, wideband_indicators
from .model import (FrequencyModel, HotPath, NoiseSpec, Scatterer, Scene, SceneConfig,
                    build_scene, clutter_rings, scale_clutter_to_scnr)
