"""
Cluster expansion of a polymer system: Ursell functions, cluster
enumeration, truncated sums L_{<=k}, the exact polymer partition function
and the k0 selector for the truncation order.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import networkx as nx

from .budgets import check_budget, get_budget
from .exceptions import ParameterError
from .graphs import Side, max_codegree, members
from .polymer import PolymerSystem, enumerate_polymers

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Ursell function
# ---------------------------------------------------------------------------

def _adjacency_masks(h):
    nodes = list(h.nodes)
    index = {node: i for i, node in enumerate(nodes)}
    adj = [0] * len(nodes)
    for u, v in h.edges():
        if u == v:
            continue
        adj[index[u]] |= 1 << index[v]
        adj[index[v]] |= 1 << index[u]
    return tuple(adj)


@lru_cache(maxsize=65536)
def connected_spanning_sum(adj):
    """sum over connected spanning edge subsets F of (-1)^|F|, for a simple graph given by adjacency masks.

    c(S) = t(S) - sum over proper U ⊂ S containing min(S) of c(U) t(S \\ U),
    where t(S) = 1 if S spans no edge and 0 otherwise.
    """
    m = len(adj)
    full = (1 << m) - 1
    independent = [True] * (full + 1)
    for s in range(1, full + 1):
        low = s & -s
        v = low.bit_length() - 1
        independent[s] = independent[s ^ low] and not (adj[v] & s)
    c = [0] * (full + 1)
    for s in range(1, full + 1):
        low = s & -s
        total = 1 if independent[s] else 0
        rest = s ^ low
        sub = rest
        # U = low | sub for every proper subset sub of rest
        while True:
            if sub != rest:
                u = low | sub
                if independent[s ^ u]:
                    total -= c[u]
            if sub == 0:
                break
            sub = (sub - 1) & rest
        c[s] = total
    return c[full]


def ursell(h):
    """phi(H) = (1/|V|!) sum over connected spanning edge subsets F of (-1)^|F| (exact)."""
    m = h.number_of_nodes()
    if m == 0:
        raise ParameterError('Ursell function of the empty graph')
    check_budget('ursell_vertices', m)
    return Fraction(connected_spanning_sum(_adjacency_masks(h)), math.factorial(m))


def ursell_deletion_contraction(h):
    """Independent phi(H) via deletion-contraction on the edge multiset."""
    nodes = list(h.nodes)
    index = {node: i for i, node in enumerate(nodes)}
    edges = tuple((index[u], index[v]) for u, v in h.edges() if u != v)

    def count(vertices, edge_list):
        if not edge_list:
            return 1 if len(vertices) == 1 else 0
        (u, v), rest = edge_list[0], edge_list[1:]
        if u == v:
            return 0
        merged = tuple((u if a == v else a, u if b == v else b) for a, b in rest)
        return count(vertices, rest) - count(vertices - {v}, merged)

    return Fraction(count(frozenset(range(len(nodes))), edges), math.factorial(len(nodes)))


# ---------------------------------------------------------------------------
# Clusters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Cluster:
    """Multiset of polymers with a connected incompatibility graph.

    ``indices`` is nondecreasing; ``orderings`` counts the distinct ordered
    tuples it stands for.
    """

    indices: tuple
    polymers: tuple
    adjacency: tuple
    size: int
    orderings: int

    @property
    def incompat_graph(self):
        G = nx.Graph()
        G.add_nodes_from(range(len(self.indices)))
        for i, row in enumerate(self.adjacency):
            G.add_edges_from((i, j) for j in members(row) if j > i)
        return G


def _multiplicities(indices):
    counts = {}
    for i in indices:
        counts[i] = counts.get(i, 0) + 1
    return counts.values()


def _position_adjacency(system, indices):
    adj = []
    for i, a in enumerate(indices):
        row = 0
        for j, b in enumerate(indices):
            if i != j and (system.incompat[a] >> b) & 1:
                row |= 1 << j
        adj.append(row)
    return tuple(adj)


def _is_connected(adj):
    seen, frontier = 1, 1
    while frontier:
        reach = 0
        for i in members(frontier):
            reach |= adj[i]
        frontier = reach & ~seen
        seen |= frontier
    return seen == (1 << len(adj)) - 1


def iter_cluster_indices(system, k, allowed=None):
    """Yield (indices, adjacency) for every connected multiset of total size <= k."""
    if allowed is None:
        allowed = system.full_mask
    candidates = [i for i in members(allowed) if system.polymers[i].size <= k]
    sizes = [system.polymers[i].size for i in candidates]
    limit = get_budget('cluster_multisets')
    ursell_limit = get_budget('ursell_vertices')
    visited = 0
    stack = [((), 0, 0)]
    while stack:
        chosen, start, total = stack.pop()
        for pos in range(start, len(candidates)):
            size = sizes[pos]
            if total + size > k:
                # candidates are sorted by size
                break
            indices = chosen + (candidates[pos],)
            visited += 1
            if len(indices) > ursell_limit:
                check_budget('ursell_vertices', len(indices), ursell_limit)
            if visited > limit:
                check_budget('cluster_multisets', visited, limit)
            adj = _position_adjacency(system, indices)
            if _is_connected(adj):
                yield indices, adj
            if total + size < k:
                stack.append((indices, pos, total + size))


def enumerate_clusters(system, k, allowed=None):
    """Stream of Cluster objects with total size <= k."""
    for indices, adj in iter_cluster_indices(system, k, allowed):
        orderings = math.factorial(len(indices))
        for mult in _multiplicities(indices):
            orderings //= math.factorial(mult)
        yield Cluster(
            indices=indices,
            polymers=tuple(system.polymers[i] for i in indices),
            adjacency=adj,
            size=sum(system.polymers[i].size for i in indices),
            orderings=orderings,
        )


def cluster_weight(system, indices, adj):
    """Sum of omega(Gamma) over the orderings of the multiset: c(H) / prod(mult!) * prod omega."""
    coefficient = connected_spanning_sum(adj)
    denominator = 1
    for mult in _multiplicities(indices):
        denominator *= math.factorial(mult)
    weight = system.family_weight(indices)
    if system.params.exact:
        return Fraction(coefficient, denominator) * weight
    return coefficient / denominator * float(weight)


def cluster_expansion(system, k, allowed=None):
    """(per_size, ledger_count): per_size[j] is the sum of cluster weights of total size j."""
    exact = system.params.exact
    buckets = {j: [] for j in range(1, k + 1)}
    count = 0
    for indices, adj in iter_cluster_indices(system, k, allowed):
        size = sum(system.polymers[i].size for i in indices)
        buckets[size].append(cluster_weight(system, indices, adj))
        count += 1
    if exact:
        per_size = [(j, sum(terms, Fraction(0))) for j, terms in buckets.items()]
    else:
        per_size = [(j, math.fsum(terms)) for j, terms in buckets.items()]
    return per_size, count


@dataclass
class ClusterTruncation:
    side: Side
    k: int
    value: object
    per_size: list = field(default_factory=list)
    ledger_count: int = 0
    polymer_count: int = 0

    @property
    def xi_estimate(self):
        """exp(L_{<=k}) as a float."""
        return math.exp(float(self.value))

    def below(self, k):
        """L_{<k}, the strict truncation."""
        terms = [value for j, value in self.per_size if j < k]
        return sum(terms, Fraction(0)) if isinstance(self.value, Fraction) else math.fsum(terms)

    def as_dict(self):
        return {
            'side': self.side.value,
            'k': self.k,
            'value': self.value,
            'per_size': [[j, value] for j, value in self.per_size],
            'ledger_count': self.ledger_count,
            'polymer_count': self.polymer_count,
        }


def compute_L(g, side, k, p, system=None):
    """Truncated cluster expansion L_{<=k} of the polymer model on one side."""
    side = Side(side)
    if k < 1:
        raise ParameterError('k must be at least 1')
    if system is None:
        system = PolymerSystem(g, side, enumerate_polymers(g, side, k), p)
    per_size, count = cluster_expansion(system, k)
    value = sum((v for _, v in per_size), Fraction(0)) if p.exact else math.fsum(v for _, v in per_size)
    logger.info(f'{g.name} {side.value}: L_<={k} = {float(value):.10g} from {count} clusters')
    return ClusterTruncation(side, k, value, per_size, count, len(system))


def xi_exact(g, side, p):
    """Xi_D, the sum over compatible polymer families of the product of weights."""
    system = PolymerSystem.build(g, side, p)
    return system.partition()


# ---------------------------------------------------------------------------
# Truncation order
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TailBoundInputs:
    n: int
    d: int
    kappa: float
    delta2: int
    lam: float
    q: float
    epsilon: float

    def __post_init__(self):
        if self.n < 2 or self.d < 1 or self.delta2 < 0:
            raise ParameterError('n, d must be positive and delta2 nonnegative')
        if self.lam <= 0 or not 0 <= self.q <= 1:
            raise ParameterError(f'bad lambda/q: {self.lam}, {self.q}')
        if self.epsilon <= 0:
            raise ParameterError('epsilon must be positive')

    @classmethod
    def for_graph(cls, g, p, epsilon, kappa=0, delta2=None):
        return cls(g.n, g.d, float(kappa), max_codegree(g) if delta2 is None else delta2,
                   float(p.lam), float(p.q), float(epsilon))

    @property
    def alpha_tilde(self):
        """(1 + lam) / (1 + lam q)."""
        return (1 + self.lam) / (1 + self.lam * self.q)

    @property
    def first_regime_end(self):
        """d / log log d; the first regime is empty when log log d <= 0."""
        loglog = math.log(math.log(self.d)) if self.d > math.e else 0.0
        return self.d / loglog if loglog > 0 else 0.0

    @property
    def second_regime_end(self):
        return self.d ** 3 * math.log(self.n)


def g_tilde(k, inputs):
    """Piecewise tail exponent of the cluster expansion."""
    if k < 1:
        raise ParameterError('k must be at least 1')
    d, log_alpha = inputs.d, math.log(inputs.alpha_tilde)
    if k <= inputs.first_regime_end:
        return (d * k - inputs.delta2 * k * k) * log_alpha - (inputs.kappa + 7) * k * math.log(d)
    if k <= inputs.second_regime_end:
        return math.sqrt(d) * k / 2 * log_alpha
    return k / d ** (inputs.kappa + 1)


@dataclass
class K0Selection:
    k0: int
    candidates: tuple
    target: float
    certified: bool
    restricted: bool = False

    def as_dict(self):
        return {
            'k0': self.k0,
            'candidates': list(self.candidates),
            'target': self.target,
            'certified': self.certified,
            'restricted': self.restricted,
        }


def k0_candidates(inputs, restricted=False):
    """(floor(d^3 log n), floor(d^3 log n + 1), tail candidate) and the target log(...)."""
    n, d, kappa, eps = inputs.n, inputs.d, inputs.kappa, inputs.epsilon
    spread = d ** (kappa + 1)
    if restricted:
        target = math.log(160 * n ** 3 / (eps * eps * spread))
    else:
        target = math.log(16 * n / (spread * eps))
    base = d ** 3 * math.log(n)
    tail = max(1, math.ceil(spread * target))
    return (math.floor(base), math.floor(base + 1), tail), target


def select_k0(inputs, restricted=False):
    """Smallest candidate whose tail exponent reaches the target; largest candidate, uncertified, otherwise."""
    candidates, target = k0_candidates(inputs, restricted)
    for k in sorted(set(c for c in candidates if c >= 1)):
        value = g_tilde(k, inputs)
        if value >= target and value >= 0:
            return K0Selection(k, candidates, target, True, restricted)
    k0 = max(max(candidates), 1)
    logger.warning(f'k0={k0} is not certified by the tail bound (target {target:.4g})')
    return K0Selection(k0, candidates, target, False, restricted)
