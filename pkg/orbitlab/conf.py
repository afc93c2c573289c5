"""
Library defaults. A project can override any key through the ``ORBITLAB`` dict in its Django settings.
"""
from django.conf import settings


DEFAULTS = {
    # Hard cap on the number of candidate tuples an enumeration may visit
    'ENUMERATION_BUDGET': 10 ** 8,
    'THREADS': 1,
    'CONSTANT_TOLERANCE': 1e-4,
    'QUADRATURE_REL_TOL': 1e-6,
    'QUADRATURE_MAX_DEPTH': 12,
    # Angle nodes per SO(2) factor for compact-group quadrature
    'K_NODES': 32,
    'DEFAULT_SEED': 20240601,
    'SPIRAL_C': 1.1,
    'OUTPUT_DIR': 'orbitlab_runs',
}


def get_setting(name):
    """
    Returns the configured value for ``name``, falling back to the library default when Django settings are
    not configured or do not override it.

    :param name: One of the keys of ``DEFAULTS``
    :rtype: object
    """
    if name not in DEFAULTS:
        raise KeyError('Unknown orbitlab setting {0}'.format(name))

    if settings.configured:
        return getattr(settings, 'ORBITLAB', {}).get(name, DEFAULTS[name])
    return DEFAULTS[name]


LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'standard': {
            'format': '[%(asctime)s %(levelname)s] %(name)s:%(lineno)d \'%(message)s\'',
        }
    },
    'handlers': {
        'console': {
            'level': 'DEBUG',
            'class': 'logging.StreamHandler',
            'stream': 'ext://sys.stdout',
            'formatter': 'standard'
        }
    },
    'loggers': {
        'orbitlab': {
            'handlers': ['console'],
            'level': 'INFO',
            'propagate': True
        },
    }
}


def configure(**overrides):
    """
    Configures a minimal Django settings module for running orbitlab outside of a Django project. The app has
    no models, so the database is an in-memory sqlite one.
    """
    if settings.configured:
        return
    options = {
        'SECRET_KEY': '*',
        'DEBUG': False,
        'DATABASES': {'default': {'ENGINE': 'django.db.backends.sqlite3', 'NAME': ':memory:'}},
        'INSTALLED_APPS': ('orbitlab',),
        'LOGGING': LOGGING,
        'ORBITLAB': {},
        'TIME_ZONE': 'UTC',
        'USE_TZ': True,
        'DEFAULT_AUTO_FIELD': 'django.db.models.AutoField',
    }
    options.update(overrides)
    settings.configure(**options)
