""" Access to the TNRD block of Django settings with defaults for missing keys."""
import typing
from django.conf import settings

DEFAULTS = {
    'WORKERS': 1,
    'SINGLE_PRECISION_INFERENCE': False,
    'PNG_SUPPORT': True,
    'STRICT_PROBLEM_PARAMS': True,
    'PROGRESS_LOG_EVERY': 1,
    'DEFAULT_SEED': 0,
}


def tnrdSetting(name: str) -> typing.Any:
    return getattr(settings, 'TNRD', {}).get(name, DEFAULTS[name])
