from django.apps import AppConfig


class TnrdConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'tnrd'
    verbose_name = 'Trainable nonlinear reaction diffusion'
