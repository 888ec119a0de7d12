import logging
import os
import sys

import pytest

# driver scripts in pipeline/ import each other by module name
sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), 'pipeline'))


def pytest_configure(config):
    logging.basicConfig(format='%(asctime)s %(message)s')
    config.addinivalue_line('markers', 'slow: long-running case-study reproductions')


def pytest_collection_modifyitems(config, items):
    if 'slow' in (config.getoption('-m') or ''):
        return
    skip = pytest.mark.skip(reason='slow case study, run with -m slow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip)
