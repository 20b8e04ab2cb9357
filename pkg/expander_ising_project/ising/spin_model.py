"""
Configuration weights, exact partition functions, exact Gibbs measures and
the two cross-model identities (edge percolation, classical ±1 Ising).

Exhaustive sums group the 2^n subsets by (|S|, |E(S)|) with numpy and then
evaluate the resulting count polynomial once per parameter pair, exactly with
Fractions or in the log domain with scipy's logsumexp.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

from .budgets import check_budget
from .exceptions import ParameterError
from .numeric import EXACT, FLOAT, LogWeight, check_mode, safe_log, to_exact

logger = logging.getLogger(__name__)

CHUNK_BITS = 20


@dataclass(frozen=True)
class IsingParams:
    """Fugacity lam and per-edge factor q = exp(-beta); q = 0 is the hard-core limit."""

    lam: object
    q: object
    mode: str = EXACT

    def __post_init__(self):
        check_mode(self.mode)
        if self.lam <= 0:
            raise ParameterError(f'lambda must be positive, got {self.lam}')
        if not 0 <= self.q <= 1:
            raise ParameterError(f'q must lie in [0, 1], got {self.q}')

    @classmethod
    def create(cls, lam, q=None, beta=None, mode=EXACT):
        """Build params from lambda and either q or beta (beta only in float mode)."""
        check_mode(mode)
        if (q is None) == (beta is None):
            raise ParameterError('Give exactly one of q and beta')
        if beta is not None:
            if mode == EXACT:
                raise ParameterError('beta is only accepted in float mode; pass q for exact runs')
            beta = float(beta)
            if beta < 0:
                raise ParameterError(f'beta must be nonnegative, got {beta}')
            q = math.exp(-beta)
        if mode == EXACT:
            return cls(to_exact(lam), to_exact(q), EXACT)
        return cls(float(lam), float(q), FLOAT)

    @property
    def exact(self):
        return self.mode == EXACT

    @property
    def alpha(self):
        return self.lam * (1 - self.q)

    @property
    def p(self):
        """Matching edge-retention probability 1 - q."""
        return 1 - self.q

    @property
    def hard_core(self):
        return self.q == 0

    @property
    def beta(self):
        return math.inf if self.q == 0 else -math.log(self.q)

    @property
    def one(self):
        return Fraction(1) if self.exact else 1.0

    @property
    def zero(self):
        return Fraction(0) if self.exact else 0.0

    def as_dict(self):
        return {'lambda': self.lam, 'q': self.q, 'mode': self.mode}

    def __str__(self):
        return f'lambda={self.lam}, q={self.q} ({self.mode})'


def config_weight(g, s, p):
    """lam^|s| q^|E(s)|."""
    k, m = s.bit_count(), g.induced_edges(s)
    if p.exact:
        return p.lam ** k * p.q ** m
    if m and p.q == 0:
        return LogWeight.zero()
    return LogWeight.from_log(k * math.log(p.lam) + (m * math.log(p.q) if m else 0.0))


# ---------------------------------------------------------------------------
# Subset statistics
# ---------------------------------------------------------------------------

def subset_statistics(g, start, stop):
    """Sizes and induced-edge counts for the subsets with indices in [start, stop)."""
    states = np.arange(start, stop, dtype=np.int64)
    sizes = np.zeros(len(states), dtype=np.int64)
    for v in range(g.n):
        sizes += (states >> v) & 1
    edges = np.zeros(len(states), dtype=np.int64)
    for u, v in g.edges():
        edges += ((states >> u) & 1) & ((states >> v) & 1)
    return states, sizes, edges


def iter_subset_chunks(g):
    total = 1 << g.n
    step = 1 << CHUNK_BITS
    for start in range(0, total, step):
        yield subset_statistics(g, start, min(total, start + step))


def weight_counts(g):
    """counts[k, m] = number of subsets with k vertices and m induced edges (partition_vertices budget)."""
    check_budget('partition_vertices', g.n)
    return _weight_counts(g)


@lru_cache(maxsize=16)
def _weight_counts(g):
    width = g.num_edges + 1
    counts = np.zeros((g.n + 1) * width, dtype=np.int64)
    for _, sizes, edges in iter_subset_chunks(g):
        counts += np.bincount(sizes * width + edges, minlength=len(counts))
    return counts.reshape(g.n + 1, width)


def evaluate_terms(terms, p):
    """Sum count * lam^k * q^m * factor over (count, k, m, factor) terms.

    Returns a Fraction in exact mode and a LogWeight in float mode.
    """
    if p.exact:
        total = Fraction(0)
        for count, k, m, factor in terms:
            if count:
                total += count * p.lam ** k * p.q ** m * factor
        return total
    log_lam, log_q = math.log(p.lam), safe_log(p.q)
    logs = []
    for count, k, m, factor in terms:
        if not count or factor == 0 or (m and p.q == 0):
            continue
        logs.append(math.log(count) + k * log_lam + (m * log_q if m else 0.0) + math.log(float(factor)))
    return LogWeight.from_logs(logs)


def evaluate_counts(counts, p, factor=1):
    """Evaluate a counts[k, m] table as sum counts * lam^k q^m."""
    ks, ms = np.nonzero(counts)
    return evaluate_terms(((int(counts[k, m]), int(k), int(m), factor) for k, m in zip(ks, ms)), p)


def partition_exact(g, p):
    """Z = sum over all 2^n subsets of lam^|S| q^|E(S)|."""
    Z = evaluate_counts(weight_counts(g), p)
    logger.debug(f'Z({g.name}; {p}) = {Z}')
    return Z


def independence_polynomial(g, lam):
    """sum over independent sets of lam^|I| (exact)."""
    counts = weight_counts(g)
    lam = to_exact(lam)
    return sum(int(c) * lam ** k for k, c in enumerate(counts[:, 0]))


# ---------------------------------------------------------------------------
# Gibbs distribution
# ---------------------------------------------------------------------------

class Distribution:
    """Probability vector over the 2^n configurations, indexed by bitmask."""

    def __init__(self, probs, exact):
        self.exact = exact
        self.probs = list(probs) if exact else np.asarray(probs, dtype=float)

    @classmethod
    def point_mass(cls, size, state, exact=True):
        if exact:
            probs = [Fraction(0)] * size
            probs[state] = Fraction(1)
            return cls(probs, True)
        probs = np.zeros(size)
        probs[state] = 1.0
        return cls(probs, False)

    def __len__(self):
        return len(self.probs)

    def __getitem__(self, state):
        return self.probs[state]

    def total(self):
        return sum(self.probs) if self.exact else float(self.probs.sum())

    def support(self):
        return [s for s in range(len(self)) if self.probs[s] != 0]

    def as_array(self):
        return np.array([float(x) for x in self.probs]) if self.exact else self.probs

    def tv_distance(self, other):
        """Half the l1 distance."""
        if self.exact and other.exact:
            return sum(abs(a - b) for a, b in zip(self.probs, other.probs)) / 2
        return 0.5 * float(np.abs(self.as_array() - other.as_array()).sum())

    def sample(self, rng, size=None):
        probs = self.as_array()
        return rng.choice(len(probs), size=size, p=probs / probs.sum())


def config_weights(g, p):
    """Per-state weights: Fractions in exact mode, log weights in float mode.

    Enumerates all 2^n states, so n is capped by the chain_vertices budget.
    """
    check_budget('chain_vertices', g.n)
    states, sizes, edges = subset_statistics(g, 0, 1 << g.n)
    if p.exact:
        lam_pow = [p.lam ** k for k in range(g.n + 1)]
        q_pow = [p.q ** m for m in range(g.num_edges + 1)]
        return [lam_pow[k] * q_pow[m] for k, m in zip(sizes.tolist(), edges.tolist())]
    log_w = sizes * math.log(p.lam)
    if p.q == 0:
        log_w = np.where(edges > 0, -np.inf, log_w)
    else:
        log_w = log_w + edges * math.log(p.q)
    return log_w


def gibbs_exact(g, p):
    """mu(S) = w(S)/Z for every subset S."""
    weights = config_weights(g, p)
    if p.exact:
        Z = sum(weights)
        return Distribution([w / Z for w in weights], True)
    return Distribution(np.exp(weights - logsumexp(weights)), False)


# ---------------------------------------------------------------------------
# Percolation identity
# ---------------------------------------------------------------------------

def percolation_expectation(g, lam, p_edge, mode=EXACT):
    """E over the p_edge-percolated graph G_p of its independence polynomial at lam.

    Literal sum over every retained edge set F: each vertex set S is grouped by
    the bitmask of edges it induces, and S counts for F exactly when F avoids
    that mask. Capped by the percolation_edges and partition_vertices budgets.
    """
    check_mode(mode)
    E = g.num_edges
    check_budget('percolation_edges', E)
    check_budget('partition_vertices', g.n)
    edges = g.edges()

    states = np.arange(1 << g.n, dtype=np.int64)
    sizes = np.zeros(len(states), dtype=np.int64)
    for v in range(g.n):
        sizes += (states >> v) & 1
    edge_masks = np.zeros(len(states), dtype=np.int64)
    for i, (u, v) in enumerate(edges):
        edge_masks |= (((states >> u) & 1) & ((states >> v) & 1)) << i

    retained = np.arange(1 << E, dtype=np.int64)
    retained_sizes = np.zeros(len(retained), dtype=np.int64)
    for i in range(E):
        retained_sizes += (retained >> i) & 1

    # table[f, k]: pairs (F, S) with |F| = f, |S| = k and S independent in (V, F)
    table = np.zeros((E + 1, g.n + 1), dtype=np.int64)
    keys, multiplicity = np.unique(edge_masks * (g.n + 1) + sizes, return_counts=True)
    for key, mult in zip(keys.tolist(), multiplicity.tolist()):
        emask, k = divmod(key, g.n + 1)
        hits = retained_sizes[(retained & emask) == 0]
        table[:, k] += mult * np.bincount(hits, minlength=E + 1)

    if mode == EXACT:
        lam, pe = to_exact(lam), to_exact(p_edge)
        total = Fraction(0)
        for f, k in zip(*np.nonzero(table)):
            total += int(table[f, k]) * pe ** int(f) * (1 - pe) ** (E - int(f)) * lam ** int(k)
        return total
    lam, pe = float(lam), float(p_edge)
    logs = []
    for f, k in zip(*np.nonzero(table)):
        f, k = int(f), int(k)
        if (f and pe == 0) or (E - f and pe == 1):
            continue
        logs.append(math.log(int(table[f, k])) + f * safe_log(pe) + (E - f) * safe_log(1 - pe)
                    + k * math.log(lam))
    return LogWeight.from_logs(logs)


# ---------------------------------------------------------------------------
# Classical ±1 Ising equivalence
# ---------------------------------------------------------------------------

def classical_params(lam, beta, d):
    """(J, h, shift) with w(S) = exp(J sum s_u s_v + h sum s_v - shift n)."""
    if d < 1:
        raise ParameterError('d must be at least 1')
    if lam <= 0:
        raise ParameterError('lambda must be positive')
    J = -beta / 4
    h = math.log(lam) / 2 - beta * d / 4
    shift = beta * d / 8 - math.log(lam) / 2
    return J, h, shift


def classical_weight(g, s, J, h, shift):
    """exp(J sum_{uv in E} s_u s_v + h sum_v s_v - shift n) for spins s_v = 2[v in S] - 1."""
    spin = [1 if (s >> v) & 1 else -1 for v in range(g.n)]
    coupling = sum(spin[u] * spin[v] for u, v in g.edges())
    field = sum(spin)
    return math.exp(J * coupling + h * field - shift * g.n)