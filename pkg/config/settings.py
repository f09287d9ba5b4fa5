"""
Django settings for the protoshape toolkit.

Django hosts the app registry, logging and the command runner; there is no
database and no web surface.
"""
import logging
import os
from pathlib import Path

import environ

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Environment variables
env = environ.Env(
    DEBUG=(bool, False),
    PROTOSHAPE_THREADS=(int, 1),
    PROTOSHAPE_OUTPUT_DIR=(str, 'runs'),
    PROTOSHAPE_LOG_LEVEL=(str, 'INFO'),
    PROTOSHAPE_PEXIT_DELTA=(float, 1e-6),
    PROTOSHAPE_PEXIT_MAX_ITERATIONS=(int, 2000),
    PROTOSHAPE_THRESHOLD_RESOLUTION_DB=(float, 0.005),
    PROTOSHAPE_THRESHOLD_SCAN_STEP_DB=(float, 0.1),
)

# Take environment variables from .env file
environ.Env.read_env(BASE_DIR / '.env')

SECRET_KEY = env('SECRET_KEY', default='protoshape-local')

DEBUG = env('DEBUG')

ALLOWED_HOSTS = []

# Application definition
DJANGO_APPS = [
    'django.contrib.contenttypes',
]

LOCAL_APPS = [
    'apps.common',
    'apps.constellation',
    'apps.surrogates',
    'apps.pexit',
    'apps.protopt',
    'apps.qclift',
    'apps.linksim',
    'apps.pipeline',
]

INSTALLED_APPS = DJANGO_APPS + LOCAL_APPS

# No persistence; every artifact is a file
DATABASES = {}

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

USE_TZ = True
TIME_ZONE = 'UTC'

# Toolkit defaults
PROTOSHAPE = {
    'VERSION': '1.0.0',
    'THREADS': env('PROTOSHAPE_THREADS'),
    'OUTPUT_DIR': env('PROTOSHAPE_OUTPUT_DIR'),
    'PEXIT_DELTA': env('PROTOSHAPE_PEXIT_DELTA'),
    'PEXIT_MAX_ITERATIONS': env('PROTOSHAPE_PEXIT_MAX_ITERATIONS'),
    'THRESHOLD_RESOLUTION_DB': env('PROTOSHAPE_THRESHOLD_RESOLUTION_DB'),
    'THRESHOLD_SCAN_STEP_DB': env('PROTOSHAPE_THRESHOLD_SCAN_STEP_DB'),
}

LOG_LEVEL = env('PROTOSHAPE_LOG_LEVEL').upper()
LOG_DIR = BASE_DIR / 'logs'

# Logging
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {thread:d} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'file': {
            'level': 'INFO',
            'class': 'logging.FileHandler',
            'filename': str(LOG_DIR / 'protoshape.log'),
            'formatter': 'verbose',
        },
        'console': {
            'level': 'DEBUG',
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'django': {
            'handlers': ['file', 'console'],
            'level': 'INFO',
            'propagate': True,
        },
        'protoshape': {
            'handlers': ['file', 'console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}

# Create logs directory
os.makedirs(LOG_DIR, exist_ok=True)

# Error reporting
if env('SENTRY_DSN', default=''):
    import sentry_sdk
    from sentry_sdk.integrations.logging import LoggingIntegration

    sentry_logging = LoggingIntegration(
        level=logging.INFO,
        event_level=logging.ERROR
    )

    sentry_sdk.init(
        dsn=env('SENTRY_DSN'),
        integrations=[sentry_logging],
        traces_sample_rate=0.0,
        send_default_pii=False
    )
