"""
Django settings for expander_ising_project.
"""

from pathlib import Path
from decouple import config

# Build paths inside the project
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config('SECRET_KEY', default='django-insecure-expander-ising-local-only')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []

# Application definition
INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'expander_ising_project.ising',
]

# Database
# Run manifests are recorded to SQLite; nothing else touches the database.
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': config('ISING_DB_PATH', default=str(BASE_DIR / 'runs.sqlite3')),
    }
}

# SQLite pragmas for recorded runs
if 'sqlite' in DATABASES['default']['ENGINE']:
    def init_sqlite_connection(sender, connection, **kwargs):
        if connection.vendor == 'sqlite':
            cursor = connection.cursor()
            cursor.execute('PRAGMA journal_mode=WAL;')
            cursor.execute('PRAGMA synchronous=NORMAL;')
            cursor.close()

    from django.db.backends.signals import connection_created
    connection_created.connect(init_sqlite_connection)

USE_TZ = True
TIME_ZONE = 'UTC'

# Default primary key field type
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Logging
ISING_LOG_LEVEL = config('ISING_LOG_LEVEL', default='INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'expander_ising_project': {
            'handlers': ['console'],
            'level': ISING_LOG_LEVEL,
            'propagate': False,
        },
    },
}

# Run configuration
ISING_CI = config('ISING_CI', default=False, cast=bool)
ISING_RECORD_RUNS = config('ISING_RECORD_RUNS', default=False, cast=bool)
ISING_THREADS = config('ISING_THREADS', default=0, cast=int)  # 0 = all cores

# Exhaustive enumeration budgets. EXPANDER_ISING_BUDGET overrides every
# vertex-count budget at once; ISING_BUDGET_<NAME> overrides a single entry.
_VERTEX_BUDGET = config('EXPANDER_ISING_BUDGET', default=None, cast=lambda v: int(v) if v else None)

ISING_BUDGETS = {
    'partition_vertices': config('ISING_BUDGET_PARTITION_VERTICES', default=_VERTEX_BUDGET or 24, cast=int),
    'chain_vertices': config('ISING_BUDGET_CHAIN_VERTICES', default=_VERTEX_BUDGET or 16, cast=int),
    'dense_chain_vertices': config('ISING_BUDGET_DENSE_CHAIN_VERTICES', default=10, cast=int),
    'percolation_edges': config('ISING_BUDGET_PERCOLATION_EDGES', default=20, cast=int),
    'expansion_subset_size': config('ISING_BUDGET_EXPANSION_SUBSET_SIZE', default=12, cast=int),
    'expansion_subsets': config('ISING_BUDGET_EXPANSION_SUBSETS', default=2_000_000, cast=int),
    'polymer_sum_neighbors': config('ISING_BUDGET_POLYMER_SUM_NEIGHBORS', default=24, cast=int),
    'ursell_vertices': config('ISING_BUDGET_URSELL_VERTICES', default=9, cast=int),
    'polymer_configurations': config('ISING_BUDGET_POLYMER_CONFIGURATIONS', default=2 ** 20, cast=int),
    'cluster_multisets': config('ISING_BUDGET_CLUSTER_MULTISETS', default=5_000_000, cast=int),
    'exact_report_vertices': config('ISING_BUDGET_EXACT_REPORT_VERTICES', default=_VERTEX_BUDGET or 20, cast=int),
}
