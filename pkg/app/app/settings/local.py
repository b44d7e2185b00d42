import os
from .base import *


BASE_HOST = '127.0.0.1'

TNRD = {
    **TNRD,
    'WORKERS': int(os.environ.get('TNRD_WORKERS', TNRD['WORKERS'])),
    'SINGLE_PRECISION_INFERENCE':
        os.environ.get('TNRD_SINGLE_PRECISION', '0').lower() in {'1', 'true', 'yes'},
    'PNG_SUPPORT': os.environ.get('TNRD_PNG_SUPPORT', '1').lower() in {'1', 'true', 'yes'},
    'STRICT_PROBLEM_PARAMS':
        os.environ.get('TNRD_STRICT_PROBLEM_PARAMS', '1').lower() in {'1', 'true', 'yes'},
}

REDIS_HOST = BASE_HOST
REDIS_PORT = 6379

REDIS_URL = f'redis://:{os.environ.get("REDIS_PASSWORD")}@{REDIS_HOST}:{REDIS_PORT}'

# Background training/evaluation jobs; commands run in-process without '--background'.
if os.environ.get('RABBITMQ_DEFAULT_USER'):
    CELERY_BROKER_URL = f'amqp://{os.environ.get("RABBITMQ_DEFAULT_USER")}:'\
        f'{os.environ.get("RABBITMQ_DEFAULT_PASS")}@{BASE_HOST}/'\
        f'{os.environ.get("RABBITMQ_DEFAULT_VHOST")}'
    CELERY_RESULT_BACKEND = f'{REDIS_URL}/{os.environ.get("REDIS_CELERY_DB")}'
CELERY_RESULT_EXPIRES = 24 * 3600
