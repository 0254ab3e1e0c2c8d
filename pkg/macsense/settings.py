"""
macsense settings
Environment-driven configuration and logging setup.
"""

import os
import logging.config
from pathlib import Path

from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

load_dotenv()

# Django runs only the management commands: no database, no views
SECRET_KEY = os.environ.get('DJANGO_SECRET_KEY', 'macsense-commands-only')

DEBUG = os.environ.get('DEBUG', 'False').lower() == 'true'

INSTALLED_APPS = [
    'macsense',
]

DATABASES = {}

USE_TZ = True

# Worker threads for frontier grids and FME batches; results never depend on it
THREADS = max(1, int(os.environ.get('MACSENSE_THREADS', '1')))

# Float-to-rational bridge: information terms are rounded to k / 2**RATIONAL_BITS
RATIONAL_BITS = int(os.environ.get('MACSENSE_RATIONAL_BITS', '40'))

# Second-example frontier grid: 'fast' (coarse step 1/4) or 'full' (coarse step 1/16)
FRONTIER_GRID = os.environ.get('MACSENSE_FRONTIER_GRID', 'fast')

# Slack used when strict inequalities are read under closure
CLOSURE_SLACK = float(os.environ.get('MACSENSE_CLOSURE_SLACK', '1e-9'))

LOG_LEVEL = os.environ.get('MACSENSE_LOG_LEVEL', 'INFO').upper()
LOG_FILE = os.environ.get('MACSENSE_LOG_FILE')

# Logging configuration
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} - {name} - {levelname} - {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'level': LOG_LEVEL,
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'macsense': {
            'handlers': ['console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}

if LOG_FILE:
    LOGGING['handlers']['file'] = {
        'level': LOG_LEVEL,
        'class': 'logging.FileHandler',
        'filename': LOG_FILE,
        'formatter': 'verbose',
    }
    LOGGING['loggers']['macsense']['handlers'].append('file')


def configure_logging(level: str = None):
    """Apply LOGGING, optionally overriding the level for this process"""
    config = LOGGING
    if level:
        level = level.upper()
        config = {
            **LOGGING,
            'handlers': {name: {**handler, 'level': level} for name, handler in LOGGING['handlers'].items()},
            'loggers': {name: {**logger, 'level': level} for name, logger in LOGGING['loggers'].items()},
        }
    logging.config.dictConfig(config)
