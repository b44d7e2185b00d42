from .celery_app import celeryApp

__all__ = ['celeryApp']
