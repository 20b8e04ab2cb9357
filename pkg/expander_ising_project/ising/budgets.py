import logging

from django.conf import settings

from .exceptions import BudgetExceededError

logger = logging.getLogger(__name__)

DEFAULT_BUDGETS = {
    'partition_vertices': 24,
    'chain_vertices': 16,
    'dense_chain_vertices': 10,
    'percolation_edges': 20,
    'expansion_subset_size': 12,
    'expansion_subsets': 2_000_000,
    'polymer_sum_neighbors': 24,
    'ursell_vertices': 9,
    'polymer_configurations': 2 ** 20,
    'cluster_multisets': 5_000_000,
    'exact_report_vertices': 20,
}


def get_budget(name):
    """Return the configured budget, falling back to the built-in default."""
    if settings.configured:
        configured = getattr(settings, 'ISING_BUDGETS', {})
        if name in configured:
            return configured[name]
    return DEFAULT_BUDGETS[name]


def check_budget(name, requested, limit=None):
    """Raise BudgetExceededError when requested > budget."""
    limit = get_budget(name) if limit is None else limit
    if requested > limit:
        logger.warning(f'Refusing {name}: {requested} > {limit}')
        raise BudgetExceededError(name, limit, requested)
    return limit
