"""Pytest wiring: configure Django the same way manage.py does before tests are collected."""
import os
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent / 'app'))
os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'app.settings.local')

import django  # noqa: E402

django.setup()

import pytest  # noqa: E402
from tnrd.runner import ACCEPTANCE_TAG  # noqa: E402


def pytest_addoption(parser):
    parser.addoption('--tag', action='append', default=[],
                     help="Run tests carrying this Django tag (e.g. --tag acceptance), like 'manage.py test --tag'.")


def pytest_collection_modifyitems(config, items):
    """ Same policy as TnrdTestRunner: 'acceptance'-tagged tests are skipped unless --tag acceptance is given."""
    if ACCEPTANCE_TAG in config.getoption('--tag'):
        return
    skip = pytest.mark.skip(reason="acceptance test; run with --tag acceptance")
    for item in items:
        tags = set(getattr(getattr(item, 'function', None), 'tags', ())) | set(getattr(getattr(item, 'cls', None), 'tags', ()))
        if ACCEPTANCE_TAG in tags:
            item.add_marker(skip)
