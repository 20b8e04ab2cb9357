"""
Polymers on one side of the bipartition: 2-linked vertex sets whose closure
covers at most three quarters of that side, together with their decorations
B ⊆ N(A) on the opposite side.
"""

import logging
from dataclasses import dataclass

from .budgets import check_budget, get_budget
from .exceptions import PolymerError
from .graphs import Side, closure, is_two_linked, iter_two_linked, members, popcount, two_linked_components

logger = logging.getLogger(__name__)

PRODUCT = 'product'
SUM = 'sum'


@dataclass(frozen=True)
class Polymer:
    a: int
    side: Side
    closure_size: int
    neighborhood: int

    @property
    def size(self):
        return popcount(self.a)

    @property
    def vertices(self):
        return members(self.a)

    def sort_key(self):
        return (self.size, self.vertices)

    def as_dict(self):
        return {'a': self.vertices, 'side': self.side.value, 'closure_size': self.closure_size}


@dataclass(frozen=True)
class DecoratedPolymer:
    polymer: Polymer
    b: int
    edges_ab: int

    @property
    def a(self):
        return self.polymer.a

    @property
    def vertices(self):
        return self.polymer.a | self.b

    def as_dict(self):
        return {'a': self.polymer.vertices, 'b': members(self.b)}


@dataclass(frozen=True)
class PolymerConfiguration:
    """Pairwise compatible decorated polymers, ordered by minimum vertex of A."""

    side: Side
    polymers: tuple = ()

    @property
    def vertices(self):
        """D = union of the A_i and B_i."""
        mask = 0
        for dp in self.polymers:
            mask |= dp.vertices
        return mask

    @property
    def defect(self):
        """Union of the A_i."""
        mask = 0
        for dp in self.polymers:
            mask |= dp.a
        return mask

    def __len__(self):
        return len(self.polymers)

    def weight(self, p):
        result = p.one
        for dp in self.polymers:
            result *= decorated_weight(dp, p)
        return result

    def as_dict(self):
        return {'side': self.side.value, 'polymers': [dp.as_dict() for dp in self.polymers]}


def closure_ok(g, closure_mask):
    """|[A]| <= (3/4)|side|."""
    return 4 * popcount(closure_mask) <= 3 * g.side_size


def make_polymer(g, a, side):
    side = Side(side)
    if not is_two_linked(g, a):
        raise PolymerError(f'{members(a)} is not 2-linked')
    c = closure(g, a, side)
    if not closure_ok(g, c):
        raise PolymerError(f'{members(a)} violates the closure constraint ({popcount(c)} > 3/4 of {g.side_size})')
    return Polymer(a, side, popcount(c), g.neighborhood(a))


def enumerate_polymers(g, side, k):
    """Every polymer with |a| <= k, in canonical (size, vertices) order."""
    side = Side(side)
    if k < 1:
        raise PolymerError('k must be at least 1')
    found = []
    below = 0
    for root in g.side_vertices(side):
        for a in iter_two_linked(g, root, side, k, forbidden=below):
            c = closure(g, a, side)
            if closure_ok(g, c):
                found.append(Polymer(a, side, popcount(c), g.neighborhood(a)))
        below |= 1 << root
    found.sort(key=Polymer.sort_key)
    logger.debug(f'{g.name} {side.value}: {len(found)} polymers of size <= {k}')
    return found


def degrees_into(g, polymer):
    """[(u, d_a(u)) for u in N(a)]."""
    return [(u, popcount(g.neighbors[u] & polymer.a)) for u in members(polymer.neighborhood)]


def polymer_weight(g, polymer, p, mode=PRODUCT):
    """omega(A) = sum over B ⊆ N(A) of lam^{|A|+|B|} q^{|E(A,B)|} / (1+lam)^{|N(A)|}."""
    degrees = degrees_into(g, polymer)
    if mode == PRODUCT:
        result = p.lam ** polymer.size
        for _, j in degrees:
            result *= (1 + p.lam * p.q ** j) / (1 + p.lam)
        return result
    if mode != SUM:
        raise PolymerError(f'Unknown weight mode: {mode!r}')
    check_budget('polymer_sum_neighbors', len(degrees))
    total = p.zero
    for b in range(1 << len(degrees)):
        k = popcount(b)
        edges = sum(j for i, (_, j) in enumerate(degrees) if (b >> i) & 1)
        total += p.lam ** k * p.q ** edges
    return total * p.lam ** polymer.size / (1 + p.lam) ** len(degrees)


def decorate(g, polymer, b):
    if b & ~polymer.neighborhood:
        raise PolymerError(f'decoration {members(b)} is not inside N(A) = {members(polymer.neighborhood)}')
    edges = sum(popcount(g.neighbors[u] & polymer.a) for u in members(b))
    return DecoratedPolymer(polymer, b, edges)


def iter_decorations(g, polymer):
    """All decorated polymers (A, B) for the given A."""
    nbrs = members(polymer.neighborhood)
    check_budget('polymer_sum_neighbors', len(nbrs))
    for bits in range(1 << len(nbrs)):
        b = 0
        for i, u in enumerate(nbrs):
            if (bits >> i) & 1:
                b |= 1 << u
        yield decorate(g, polymer, b)


def decorated_weight(dp, p):
    """lam^{|A|+|B|} q^{|E(A,B)|} / (1+lam)^{|N(A)|}."""
    poly = dp.polymer
    return p.lam ** (poly.size + popcount(dp.b)) * p.q ** dp.edges_ab / (1 + p.lam) ** popcount(poly.neighborhood)


def decoration_probability(p, j):
    """P(u in B) for u in N(A) with d_A(u) = j, given A."""
    w = p.lam * p.q ** j
    return w / (1 + w)


def incompatible(g, first, second):
    """True iff the union of the two A-sets is 2-linked (so every polymer is incompatible with itself)."""
    if first.side is not second.side:
        raise PolymerError('polymers on different sides are never compared')
    return is_two_linked(g, first.a | second.a)


def recover_configuration(g, s, side):
    """Decorated configuration read off s, or None when a component breaks the closure constraint."""
    side = Side(side)
    found = []
    for a in two_linked_components(g, s, side):
        c = closure(g, a, side)
        if not closure_ok(g, c):
            return None
        poly = Polymer(a, side, popcount(c), g.neighborhood(a))
        found.append(decorate(g, poly, s & poly.neighborhood))
    return PolymerConfiguration(side, tuple(found))


class PolymerSystem:
    """Indexed polymer list with weights, incompatibility masks and a memoized partition function.

    Index sets are bitmasks over polymer positions. ``partition(allowed)`` is
    the polymer partition function restricted to the allowed polymers.
    """

    def __init__(self, g, side, polymers, p, weight_mode=PRODUCT):
        self.g = g
        self.side = Side(side)
        self.polymers = list(polymers)
        self.params = p
        self.weights = [polymer_weight(g, poly, p, weight_mode) for poly in self.polymers]
        self.reach = [poly.a | g.two_step(poly.a) for poly in self.polymers]
        self.incompat = []
        for i, poly in enumerate(self.polymers):
            mask = 0
            for j, other in enumerate(self.polymers):
                if self.reach[i] & other.a:
                    mask |= 1 << j
            self.incompat.append(mask)
        self.containing = [0] * g.n
        for i, poly in enumerate(self.polymers):
            for v in poly.vertices:
                self.containing[v] |= 1 << i
        self._memo = {0: p.one}

    @classmethod
    def build(cls, g, side, p, k=None):
        """System of all polymers with |a| <= k (every polymer when k is None)."""
        return cls(g, side, enumerate_polymers(g, side, k or g.side_size), p)

    def __len__(self):
        return len(self.polymers)

    @property
    def full_mask(self):
        return (1 << len(self.polymers)) - 1

    def index_mask(self, max_size=None):
        if max_size is None:
            return self.full_mask
        mask = 0
        for i, poly in enumerate(self.polymers):
            if poly.size <= max_size:
                mask |= 1 << i
        return mask

    def allowed_mask(self, excluded=0, anchored=()):
        """Polymers avoiding the excluded vertices and compatible with every anchored polymer."""
        allowed = self.full_mask
        for v in members(excluded):
            allowed &= ~self.containing[v]
        for i in anchored:
            allowed &= ~self.incompat[i]
        return allowed

    def partition(self, allowed=None):
        """Sum over compatible subfamilies of the allowed polymers of the product of weights."""
        if allowed is None:
            allowed = self.full_mask
        return family_sum(self.incompat, self.weights, self._memo, allowed)

    def count_families(self, allowed=None):
        if allowed is None:
            allowed = self.full_mask
        return family_sum(self.incompat, [1] * len(self.polymers), {0: 1}, allowed)

    def iter_families(self, allowed=None):
        """Yield every compatible subfamily (tuple of indices) of the allowed polymers."""
        if allowed is None:
            allowed = self.full_mask
        check_budget('polymer_configurations', self.count_families(allowed))
        stack = [((), allowed)]
        while stack:
            chosen, mask = stack.pop()
            if not mask:
                yield chosen
                continue
            low = mask & -mask
            i = low.bit_length() - 1
            stack.append((chosen, mask & ~low))
            stack.append((chosen + (i,), mask & ~self.incompat[i]))

    def family_weight(self, indices):
        result = self.params.one
        for i in indices:
            result *= self.weights[i]
        return result

    def configuration(self, decorated):
        """PolymerConfiguration from decorated polymers, ordered by minimum vertex."""
        ordered = sorted(decorated, key=lambda dp: (dp.a & -dp.a).bit_length())
        return PolymerConfiguration(self.side, tuple(ordered))


def family_sum(incompat, weights, memo, allowed):
    """Xi(allowed) = Xi(allowed - i) + w_i Xi(allowed minus everything incompatible with i), i = lowest index."""
    if allowed in memo:
        return memo[allowed]
    limit = get_budget('polymer_configurations')
    stack = [allowed]
    while stack:
        mask = stack[-1]
        if mask in memo:
            stack.pop()
            continue
        low = mask & -mask
        i = low.bit_length() - 1
        without, compatible = mask & ~low, mask & ~incompat[i]
        pending = [m for m in (without, compatible) if m not in memo]
        if pending:
            stack.extend(pending)
            continue
        memo[mask] = memo[without] + weights[i] * memo[compatible]
        stack.pop()
        if len(memo) > limit:
            check_budget('polymer_configurations', len(memo), limit)
    return memo[allowed]
