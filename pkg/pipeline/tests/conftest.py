import copy

import pytest

SMALL = {
    'seed': 7,
    'scene': {
        'N': 16, 'L': 16, 'N_t': 4, 'N_r': 4,
        'objects': [
            {'name': 'toi', 'azimuth_deg': -10.0, 'range_m': 41.8, 'velocity_mps': -31.2,
             'power': 1.0, 'fixed_gain': True},
        ],
        'clutter': {'count': 8, 'rings': 2, 'power': 10.0},
        'noise': {'kind': 'white', 'sigma2': 1.0},
    },
    'pipeline': {'modulation': 'qpsk', 'tx_beams_deg': [-10.0], 'target': 'toi'},
    'optimization': {'users': [1], 'gamma_db': [0.0, 3.0], 'subcarriers': 2, 'max_outer': 5,
                     'slp_symbols': 2, 'starts': 1},
    'output': {'formats': ['csv']},
}


@pytest.fixture
def small_doc():
    """A small experiment document, safe to mutate"""
    return copy.deepcopy(SMALL)
