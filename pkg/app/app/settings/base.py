import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent.parent

SECRET_KEY = os.environ.get('DJANGO_SECRET_KEY', 'tnrd-local-only-not-a-secret')

DEBUG = True

# Application definition

INSTALLED_APPS = [
    'tnrd.apps.TnrdConfig',
]

# The engine keeps no relational state; the sqlite file only satisfies Django.
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

TEST_RUNNER = 'tnrd.runner.TnrdTestRunner'

# Engine runtime configuration. Numerical constants live in tnrd.const.
TNRD = {
    # parallel per-sample forward/backward workers
    'WORKERS': 1,
    # run 'apply' and 'eval' restorations in float32
    'SINGLE_PRECISION_INFERENCE': False,
    # accept .png paths besides the contractual PGM format
    'PNG_SUPPORT': True,
    # restrict sigma / factor / quality to the tested values
    'STRICT_PROBLEM_PARAMS': True,
    # one progress line every N L-BFGS iterations
    'PROGRESS_LOG_EVERY': 1,
    'DEFAULT_SEED': 0,
}

CELERY_BROKER_URL = None
CELERY_RESULT_BACKEND = None
CELERY_TIMEZONE = 'UTC'
CELERY_TASK_SERIALIZER = 'json'
CELERY_RESULT_SERIALIZER = 'json'

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'filters': {
        'require_debug_true': {
            '()': 'django.utils.log.RequireDebugTrue',
        },
    },
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {filename} {lineno} {funcName} {message}',
            'style': '{',
        },
        'progress': {
            'format': '{asctime} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'level': 'INFO',
            'class': 'logging.StreamHandler',
        },
        'console_debug': {
            'level': 'DEBUG',
            'filters': ['require_debug_true'],
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
        'console_progress': {
            'level': 'INFO',
            'class': 'logging.StreamHandler',
            'formatter': 'progress',
        },
    },
    'loggers': {
        'django': {
            'handlers': ['console'],
            'level': 'INFO',
        },
        'tnrd': {
            'handlers': ['console_debug'],
            'level': 'DEBUG',
            'propagate': False,
        },
        'tnrd.progress': {
            'handlers': ['console_progress'],
            'level': 'INFO',
            'propagate': False,
        },
    }
}
