import os

import pytest


def pytest_collection_modifyitems(config, items):
    if os.environ.get('PROTOSHAPE_LONG_TESTS') == '1':
        return
    skip = pytest.mark.skip(reason='set PROTOSHAPE_LONG_TESTS=1 to run campaigns')
    for item in items:
        if 'campaign' in item.keywords:
            item.add_marker(skip)
