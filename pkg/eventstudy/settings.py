"""
Django settings for the eventstudy project.

The project has no web or database layer; Django provides settings, logging,
management commands and the test runner. Every tunable can be overridden from
the environment or a .env file through python-decouple.
"""

from pathlib import Path
from decouple import config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = config('SECRET_KEY', default='eventstudy-cli-no-http-surface')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    # Local apps
    'ingest',
    'returns',
    'market_model',
    'studies',
    'simulations',
    'reports',
]

# No persistence: all inputs and outputs are files.
DATABASES = {}

TIME_ZONE = config('TIME_ZONE', default='UTC')

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Event study defaults

EVENTSTUDY_THREADS = max(config('EVENTSTUDY_THREADS', default=1, cast=int), 1)

EVENTSTUDY_ALPHA = config('EVENTSTUDY_ALPHA', default=0.05, cast=float)

# Estimation window -89..-31 and event window -30..+10, in trading days
EVENTSTUDY_EST_START = config('EVENTSTUDY_EST_START', default=-89, cast=int)
EVENTSTUDY_EST_END = config('EVENTSTUDY_EST_END', default=-31, cast=int)
EVENTSTUDY_EVT_START = config('EVENTSTUDY_EVT_START', default=-30, cast=int)
EVENTSTUDY_EVT_END = config('EVENTSTUDY_EVT_END', default=10, cast=int)
EVENTSTUDY_MIN_ESTIMATION_DAYS = config('EVENTSTUDY_MIN_ESTIMATION_DAYS', default=30, cast=int)

EVENTSTUDY_STRICT_DAY0 = config('EVENTSTUDY_STRICT_DAY0', default=False, cast=bool)

# Hypothesis decision: reject H0 on a run of MIN_RUN consecutive significant
# days inside [RUN_UP_START, RUN_UP_END]
EVENTSTUDY_MIN_RUN = config('EVENTSTUDY_MIN_RUN', default=3, cast=int)
EVENTSTUDY_RUN_UP_START = config('EVENTSTUDY_RUN_UP_START', default=-10, cast=int)
EVENTSTUDY_RUN_UP_END = config('EVENTSTUDY_RUN_UP_END', default=-1, cast=int)


# Logging

LOG_LEVEL = config('LOG_LEVEL', default='INFO')
LOG_DIR = Path(config('LOG_DIR', default=str(BASE_DIR / 'logs')))
LOG_DIR.mkdir(parents=True, exist_ok=True)

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'standard': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'file': {
            'level': LOG_LEVEL,
            'class': 'logging.FileHandler',
            'filename': LOG_DIR / 'eventstudy.log',
            'formatter': 'standard',
        },
        'console': {
            'level': config('CONSOLE_LOG_LEVEL', default='WARNING'),
            'class': 'logging.StreamHandler',
            'formatter': 'standard',
        },
    },
    'loggers': {
        'django': {
            'handlers': ['file', 'console'],
            'level': 'INFO',
            'propagate': True,
        },
        **{
            app: {
                'handlers': ['file', 'console'],
                'level': LOG_LEVEL,
                'propagate': False,
            }
            for app in ('ingest', 'returns', 'market_model', 'studies', 'simulations', 'reports')
        },
    },
}
