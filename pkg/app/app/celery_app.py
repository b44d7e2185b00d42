import os
from celery import Celery

# set the default Django settings module for the 'celery' program.
os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'app.settings.local')

celeryApp = Celery('app')
# namespace='CELERY' means all celery-related configuration keys should have a `CELERY_` prefix.
celeryApp.config_from_object('django.conf:settings', namespace='CELERY')
celeryApp.autodiscover_tasks()
