import os
import sys

# Build paths inside the project like this: os.path.join(BASE_DIR, ...)
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(BASE_DIR, 'apps'))

# Only management commands run; nothing is served.
SECRET_KEY = 'betting-on-predictions-cli-only'

DEBUG = False

ALLOWED_HOSTS = []

# Application definition

INSTALLED_APPS = [
    # My apps
    'core',
    'classifiers',
    'imputed',
    'baselines',
    'combiner',
    'robustness',
    'harness',
    'cli',
]

# 不使用数据库：所有结果写成CSV
DATABASES = {}


# 模拟实验配置

SIMULATION_OUTPUT_DIR = os.path.join(BASE_DIR, 'runs')

# None -> all available cores
SIMULATION_WORKERS = None

# Desk scale finishes in minutes; PAPER_SCALE is the full-size run.
DESK_SCALE = {
    'trials': 200,
    'steps': 300,
    'M': 32,
}
PAPER_SCALE = {
    'trials': 500,
    'steps': 500,
    'M': 128,
}

VALIDITY_ALPHA = 0.05

# |E - 1| allowed by the exact oracles
ORACLE_TOLERANCE = 1e-8


# Logging

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stderr',
            'formatter': 'verbose',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
    'loggers': {
        app: {
            'handlers': ['console'],
            'level': 'INFO',
            'propagate': False,
        }
        for app in ('core', 'classifiers', 'imputed', 'baselines', 'combiner', 'robustness', 'harness', 'cli')
    },
}
