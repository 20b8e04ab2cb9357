"""
Bipartite d-regular graphs: generators, file loading, class validation and
the closure / 2-linkage primitives used by the polymer code.

Vertex sets are plain ints used as bitmasks (bit v set <=> v in the set).
Vertex numbering is canonical per generator: nodes are sorted by their
coordinate tuples, so vertex 0 of ``hypercube:3`` is 000 and vertex 3 is 011.
"""

import logging
import math
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from pathlib import Path

import networkx as nx
import numpy as np

from .budgets import get_budget
from .exceptions import GraphSpecError, GraphValidationError, ParameterError

logger = logging.getLogger(__name__)

GENERATORS = ('hypercube', 'torus', 'middle-layer', 'cartesian', 'cycle', 'file')

_SPEC_RE = re.compile(r'^(?P<kind>[a-z-]+):(?P<arg>.+)$')
_TORUS_RE = re.compile(r'^(?P<m>\d+)\^(?P<t>\d+)$')
_PRODUCT_SPLIT_RE = re.compile(r'x(?=(?:%s):)' % '|'.join(re.escape(g) for g in GENERATORS))
_AUTOMORPHISM_RE = re.compile(r'^\s*(\d+)\s*->\s*(\d+)\s*$')


class Side(str, Enum):
    ODD = 'odd'
    EVEN = 'even'

    @property
    def other(self):
        return Side.EVEN if self is Side.ODD else Side.ODD

    @classmethod
    def parse(cls, value):
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ParameterError(f"Unknown side: {value!r} (expected odd or even)") from None


def mask_of(vertices):
    mask = 0
    for v in vertices:
        mask |= 1 << v
    return mask


def members(mask):
    """Vertices of a bitmask in ascending order."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def popcount(mask):
    return mask.bit_count()


def apply_permutation(mask, perm):
    image = 0
    for v in members(mask):
        image |= 1 << perm[v]
    return image


@dataclass(frozen=True)
class BipartiteGraph:
    """Immutable d-regular bipartite graph with equal sides."""

    n: int
    d: int
    neighbors: tuple
    odd_mask: int
    name: str = ''
    flips: tuple = ()
    labels: tuple = ()

    def __post_init__(self):
        if self.n < 2 or self.n % 2:
            raise GraphValidationError(f'{self.name}: n={self.n} must be even and at least 2')
        if self.d < 1:
            raise GraphValidationError(f'{self.name}: degree must be at least 1')
        if len(self.neighbors) != self.n:
            raise GraphValidationError(f'{self.name}: adjacency has {len(self.neighbors)} rows, expected {self.n}')
        full = (1 << self.n) - 1
        for v, nbrs in enumerate(self.neighbors):
            if nbrs & ~full:
                raise GraphValidationError(f'{self.name}: vertex {v} has a neighbor index >= n')
            if popcount(nbrs) != self.d:
                raise GraphValidationError(f'{self.name}: vertex {v} has degree {popcount(nbrs)}, expected {self.d}')
            same_side = self.odd_mask if (self.odd_mask >> v) & 1 else full & ~self.odd_mask
            if nbrs & same_side:
                raise GraphValidationError(f'{self.name}: vertex {v} has a neighbor on its own side')
            for u in members(nbrs):
                if not (self.neighbors[u] >> v) & 1:
                    raise GraphValidationError(f'{self.name}: adjacency not symmetric at ({v}, {u})')
        if popcount(self.odd_mask) != self.n // 2:
            raise GraphValidationError(
                f'{self.name}: sides have sizes {popcount(self.odd_mask)} and {self.n - popcount(self.odd_mask)}'
            )

    def __str__(self):
        return f'{self.name or "graph"} (n={self.n}, d={self.d})'

    @property
    def full_mask(self):
        return (1 << self.n) - 1

    @property
    def even_mask(self):
        return self.full_mask & ~self.odd_mask

    @property
    def side_size(self):
        return self.n // 2

    @property
    def num_edges(self):
        return self.n * self.d // 2

    def side_mask(self, side):
        return self.odd_mask if Side(side) is Side.ODD else self.even_mask

    def side_of(self, v):
        return Side.ODD if (self.odd_mask >> v) & 1 else Side.EVEN

    def side_vertices(self, side):
        return members(self.side_mask(side))

    def label(self, v):
        return self.labels[v] if self.labels else str(v)

    def edges(self):
        return [(u, v) for u in range(self.n) for v in members(self.neighbors[u]) if u < v]

    def neighborhood(self, mask):
        """N(mask): union of neighbor sets."""
        nb = 0
        for v in members(mask):
            nb |= self.neighbors[v]
        return nb

    def induced_edges(self, mask):
        """|E(mask)|, the number of edges with both endpoints in mask."""
        return sum(popcount(self.neighbors[v] & mask) for v in members(mask & self.odd_mask))

    def degree_into(self, v, mask):
        return popcount(self.neighbors[v] & mask)

    @cached_property
    def square(self):
        """Per-vertex masks of vertices at distance 1 or 2 (the G² neighborhood)."""
        rows = []
        for v in range(self.n):
            reach = self.neighbors[v]
            for u in members(self.neighbors[v]):
                reach |= self.neighbors[u]
            rows.append(reach & ~(1 << v))
        return tuple(rows)

    def two_step(self, mask):
        reach = 0
        for v in members(mask):
            reach |= self.square[v]
        return reach

    @cached_property
    def adjacency(self):
        """Dense 0/1 adjacency matrix."""
        a = np.zeros((self.n, self.n), dtype=np.int64)
        for v in range(self.n):
            a[v, members(self.neighbors[v])] = 1
        return a

    def to_networkx(self):
        G = nx.Graph()
        G.add_nodes_from(range(self.n))
        G.add_edges_from(self.edges())
        return G


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

def _as_tuple(node):
    if isinstance(node, tuple):
        return node
    return (node,)


def _from_networkx(G, name, is_odd, flip_maps=(), label=str):
    """Index the nodes of G in sorted order and build a BipartiteGraph."""
    nodes = sorted(G.nodes())
    index = {node: i for i, node in enumerate(nodes)}
    degrees = {deg for _, deg in G.degree()}
    if len(degrees) != 1:
        raise GraphValidationError(f'{name}: graph is not regular (degrees {sorted(degrees)})')
    neighbors = tuple(mask_of(index[u] for u in G[node]) for node in nodes)
    odd_mask = mask_of(index[node] for node in nodes if is_odd(node))
    flips = tuple(tuple(index[fmap(node)] for node in nodes) for fmap in flip_maps)
    return BipartiteGraph(
        n=len(nodes),
        d=degrees.pop(),
        neighbors=neighbors,
        odd_mask=odd_mask,
        name=name,
        flips=flips,
        labels=tuple(label(node) for node in nodes),
    )


def _parse_int(text, what, spec):
    try:
        return int(text)
    except ValueError:
        raise GraphSpecError(f'{spec}: {what} must be an integer, got {text!r}')


def _coordinate_flip(i, modulus):
    def flip(node):
        return node[:i] + ((node[i] + 1) % modulus,) + node[i + 1:]
    return flip


def _hypercube(arg, spec):
    d = _parse_int(arg, 'dimension', spec)
    if d < 1:
        raise GraphSpecError(f'{spec}: hypercube dimension must be at least 1')
    G = nx.relabel_nodes(nx.hypercube_graph(d), _as_tuple)
    return _from_networkx(
        G, spec,
        is_odd=lambda node: sum(node) % 2 == 1,
        flip_maps=[_coordinate_flip(i, 2) for i in range(d)],
        label=lambda node: ''.join(map(str, node)),
    )


def _torus(arg, spec):
    match = _TORUS_RE.match(arg)
    if not match:
        raise GraphSpecError(f'{spec}: torus spec must look like torus:m^t')
    m, t = int(match.group('m')), int(match.group('t'))
    if m < 2 or m % 2:
        raise GraphSpecError(f'{spec}: torus side length must be even and at least 2')
    if t < 1:
        raise GraphSpecError(f'{spec}: torus dimension must be at least 1')
    if m == 2:
        logger.warning(f'{spec}: m=2 degenerates to the hypercube Q^{t} (degree {t}, not {2 * t})')
    G = nx.grid_graph(dim=[m] * t, periodic=True)
    G = nx.relabel_nodes(G, _as_tuple)
    return _from_networkx(
        G, spec,
        is_odd=lambda node: sum(node) % 2 == 1,
        flip_maps=[_coordinate_flip(i, m) for i in range(t)],
        label=lambda node: ','.join(map(str, node)),
    )


def _middle_layer(arg, spec):
    d = _parse_int(arg, 'dimension', spec)
    if d < 1 or d % 2 == 0:
        raise GraphSpecError(f'{spec}: middle-layer dimension must be odd')
    k = (d - 1) // 2
    cube = nx.relabel_nodes(nx.hypercube_graph(d), _as_tuple)
    G = cube.subgraph([node for node in cube if sum(node) in (k, k + 1)]).copy()
    return _from_networkx(
        G, spec,
        is_odd=lambda node: sum(node) % 2 == 1,
        flip_maps=[lambda node: tuple(1 - c for c in node)],
        label=lambda node: ''.join(map(str, node)),
    )


def _cycle(arg, spec):
    m = _parse_int(arg, 'length', spec)
    if m < 2 or m % 2:
        raise GraphSpecError(f'{spec}: cycle length must be even and at least 2')
    if m == 2:
        logger.warning(f'{spec}: a 2-cycle is a single edge (d=1)')
    G = nx.cycle_graph(m)
    return _from_networkx(
        G, spec,
        is_odd=lambda i: i % 2 == 0,
        flip_maps=[lambda i: (i + 1) % m],
    )


def _cartesian(arg, spec):
    parts = _PRODUCT_SPLIT_RE.split(arg, maxsplit=1)
    if len(parts) != 2:
        raise GraphSpecError(f'{spec}: expected cartesian:<spec>x<spec>')
    left, right = generate_graph(parts[0]), generate_graph(parts[1])
    G = nx.cartesian_product(left.to_networkx(), right.to_networkx())
    flip_maps = [(lambda node, f=f: (f[node[0]], node[1])) for f in left.flips]
    flip_maps += [(lambda node, f=f: (node[0], f[node[1]])) for f in right.flips]
    return _from_networkx(
        G, spec,
        is_odd=lambda node: (left.side_of(node[0]) is Side.ODD) != (right.side_of(node[1]) is Side.ODD),
        flip_maps=flip_maps,
        label=lambda node: f'{left.label(node[0])}|{right.label(node[1])}',
    )


def _file(arg, spec):
    return load_edge_list(arg, name=spec)


_BUILDERS = {
    'hypercube': _hypercube,
    'torus': _torus,
    'middle-layer': _middle_layer,
    'cartesian': _cartesian,
    'cycle': _cycle,
    'file': _file,
}


def generate_graph(spec):
    """Build a BipartiteGraph from a generator spec such as ``hypercube:3``."""
    spec = str(spec).strip()
    match = _SPEC_RE.match(spec)
    if not match or match.group('kind') not in _BUILDERS:
        raise GraphSpecError(f'Malformed graph spec {spec!r}; expected one of {", ".join(GENERATORS)}')
    graph = _BUILDERS[match.group('kind')](match.group('arg'), spec)
    logger.debug(f'Generated {graph}')
    return graph


def load_edge_list(path, name=None):
    """Load ``n d`` followed by one ``u v`` edge per line; parts come from a 2-coloring."""
    name = name or f'file:{path}'
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise GraphSpecError(f'{name}: cannot read graph file: {e}')
    lines = [line.split('#', 1)[0].strip() for line in text.splitlines()]
    lines = [line for line in lines if line]
    if not lines:
        raise GraphSpecError(f'{name}: empty graph file')
    header = lines[0].split()
    if len(header) != 2:
        raise GraphSpecError(f'{name}: header must be "n d"')
    n, d = (_parse_int(tok, 'header field', name) for tok in header)
    if n < 2 or d < 1:
        raise GraphSpecError(f'{name}: need at least 2 vertices and degree at least 1, got n={n} d={d}')
    G = nx.Graph()
    G.add_nodes_from(range(n))
    for lineno, line in enumerate(lines[1:], start=2):
        tokens = line.split()
        if len(tokens) != 2:
            raise GraphSpecError(f'{name}: line {lineno}: expected "u v"')
        u, v = (_parse_int(tok, 'vertex', name) for tok in tokens)
        if not (0 <= u < n and 0 <= v < n) or u == v:
            raise GraphSpecError(f'{name}: line {lineno}: invalid edge ({u}, {v})')
        G.add_edge(u, v)
    bad = [v for v, deg in G.degree() if deg != d]
    if bad:
        raise GraphValidationError(f'{name}: not {d}-regular (vertex {bad[0]} has degree {G.degree(bad[0])})')
    try:
        coloring = nx.bipartite.color(G)
    except nx.NetworkXError:
        raise GraphValidationError(f'{name}: graph is not bipartite')
    even_color = coloring[0]
    return _from_networkx(G, name, is_odd=lambda v: coloring[v] != even_color)


def write_edge_list(g, path):
    lines = [f'{g.n} {g.d}'] + [f'{u} {v}' for u, v in g.edges()]
    Path(path).write_text('\n'.join(lines) + '\n')
    return path


# ---------------------------------------------------------------------------
# Automorphisms
# ---------------------------------------------------------------------------

def validate_automorphism(g, perm):
    """Check that perm is a graph automorphism swapping Odd and Even."""
    perm = tuple(int(x) for x in perm)
    if sorted(perm) != list(range(g.n)):
        raise GraphValidationError(f'{g.name}: automorphism is not a permutation of 0..{g.n - 1}')
    for v in range(g.n):
        if g.side_of(perm[v]) is g.side_of(v):
            raise GraphValidationError(f'{g.name}: automorphism keeps vertex {v} on its side')
        if apply_permutation(g.neighbors[v], perm) != g.neighbors[perm[v]]:
            raise GraphValidationError(f'{g.name}: automorphism does not preserve the edges at vertex {v}')
    return perm


def load_automorphism(g, path):
    """Parse one ``i -> j`` line per vertex and validate the permutation."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise GraphSpecError(f'Cannot read automorphism file {path}: {e}')
    mapping = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith('#'):
            continue
        match = _AUTOMORPHISM_RE.match(line)
        if not match:
            raise GraphSpecError(f'{path}: line {lineno}: expected "i -> j"')
        i, j = int(match.group(1)), int(match.group(2))
        if i in mapping:
            raise GraphSpecError(f'{path}: line {lineno}: vertex {i} mapped twice')
        mapping[i] = j
    if sorted(mapping) != list(range(g.n)):
        raise GraphValidationError(f'{path}: automorphism must map every vertex 0..{g.n - 1}')
    return validate_automorphism(g, [mapping[v] for v in range(g.n)])


# ---------------------------------------------------------------------------
# Class validation
# ---------------------------------------------------------------------------

class CheckStatus(str, Enum):
    VERIFIED = 'verified'
    VIOLATED = 'violated'
    SKIPPED = 'skipped'


@dataclass(frozen=True)
class ExpansionCheck:
    status: CheckStatus
    required_size: int
    checked_size: int
    witness: tuple = None
    witness_neighborhood: int = None


@dataclass(frozen=True)
class ClassReport:
    graph: str
    n: int
    d: int
    max_codegree: int
    delta2: int
    codegree_ok: bool
    expansion: ExpansionCheck
    expansion_ratio_min: Fraction
    expansion_excess_min: float
    h_prime: ExpansionCheck
    subsets_checked: int
    size_ratio: float

    @property
    def expansion_ok(self):
        return self.expansion.status

    @property
    def h_prime_ok(self):
        return self.h_prime.status


def max_codegree(g):
    """Largest number of common neighbors over distinct vertex pairs."""
    common = g.adjacency @ g.adjacency
    np.fill_diagonal(common, 0)
    return int(common.max())


def _count_limited_size(side, max_subsets):
    """Largest s with 2 * sum_{j<=s} C(side, j) <= max_subsets."""
    total, size = 0, 0
    while size < side:
        total += 2 * math.comb(side, size + 1)
        if total > max_subsets:
            break
        size += 1
    return size


def _better_witness(current, candidate):
    if current is None:
        return True
    return (len(candidate[1]), candidate[1]) < (len(current[1]), current[1])


def validate_class(g, delta2=None, kappa=0, budget=None):
    """Check the class conditions exhaustively up to the subset-size budget.

    Condition (2) is checked as strict expansion |N(X)| > |X| for one-sided X
    with |X| <= 3n/8 (at least singletons); condition (4) as |N(X)|^2 >= d|X|^2
    for |X| <= d^3 log n. Sizes past the budget leave the status SKIPPED.
    """
    budget = get_budget('expansion_subset_size') if budget is None else budget
    kappa = Fraction(kappa) if not isinstance(kappa, float) else kappa
    codegree = max_codegree(g)

    side = g.side_size
    required2 = min(side, max(1, (3 * g.n) // 8))
    required4 = min(side, max(1, math.floor(g.d ** 3 * math.log(g.n))))
    limit = min(max(required2, required4), budget, _count_limited_size(side, get_budget('expansion_subsets')))

    witness2 = witness4 = None
    nb2 = nb4 = None
    ratio_min = None
    checked = 0

    for side_label in (Side.ODD, Side.EVEN):
        verts = g.side_vertices(side_label)
        stack = [(0, 0, 0, 0)] if limit >= 1 else []
        while stack:
            start, mask, nb, size = stack.pop()
            for i in range(start, len(verts)):
                v = verts[i]
                grown, grown_nb, s = mask | (1 << v), nb | g.neighbors[v], size + 1
                t = popcount(grown_nb)
                checked += 1
                if s <= required2:
                    ratio = Fraction(t, s)
                    if ratio_min is None or ratio < ratio_min:
                        ratio_min = ratio
                    candidate = (side_label.value, members(grown))
                    if t <= s and _better_witness(witness2, candidate):
                        witness2, nb2 = candidate, t
                if s <= required4 and t * t < g.d * s * s:
                    candidate = (side_label.value, members(grown))
                    if _better_witness(witness4, candidate):
                        witness4, nb4 = candidate, t
                if s < limit:
                    stack.append((i + 1, grown, grown_nb, s))

    def status(witness, required):
        if witness is not None:
            return CheckStatus.VIOLATED
        return CheckStatus.VERIFIED if limit >= required else CheckStatus.SKIPPED

    excess = None
    if ratio_min is not None:
        excess = float(ratio_min - 1) * g.d ** float(kappa)
    size_ratio = g.n / (g.d ** 6 * math.log(g.d)) if g.d > 1 else None

    report = ClassReport(
        graph=g.name,
        n=g.n,
        d=g.d,
        max_codegree=codegree,
        delta2=delta2,
        codegree_ok=None if delta2 is None else codegree <= delta2,
        expansion=ExpansionCheck(status(witness2, required2), required2, min(limit, required2),
                                 tuple(witness2) if witness2 else None, nb2),
        expansion_ratio_min=ratio_min,
        expansion_excess_min=excess,
        h_prime=ExpansionCheck(status(witness4, required4), required4, min(limit, required4),
                               tuple(witness4) if witness4 else None, nb4),
        subsets_checked=checked,
        size_ratio=size_ratio,
    )
    if limit < max(required2, required4):
        logger.info(f'{g.name}: expansion checked up to |X|={limit} (budget)')
    return report


# ---------------------------------------------------------------------------
# Closure and 2-linkage
# ---------------------------------------------------------------------------

def closure(g, a, side):
    """[a] = {v on side : N(v) is contained in N(a)}."""
    side = Side(side)
    side_mask = g.side_mask(side)
    if a & ~side_mask:
        raise ParameterError(f'closure on the {side.value} side got vertices {members(a & ~side_mask)} of the other side')
    nb = g.neighborhood(a)
    result = 0
    for v in members(side_mask):
        if g.neighbors[v] & ~nb == 0:
            result |= 1 << v
    return result


def two_linked_components(g, s, side):
    """Maximal G²-connected blocks of s restricted to side, ordered by minimum vertex."""
    remaining = s & g.side_mask(side)
    components = []
    while remaining:
        seed = remaining & -remaining
        component, frontier = seed, seed
        while frontier:
            reach = g.two_step(frontier) & remaining & ~component
            component |= reach
            frontier = reach
        components.append(component)
        remaining &= ~component
    return components


def is_two_linked(g, mask):
    if not mask:
        return False
    seed = mask & -mask
    component, frontier = seed, seed
    while frontier:
        reach = g.two_step(frontier) & mask & ~component
        component |= reach
        frontier = reach
    return component == mask


def iter_two_linked(g, root, side, max_size, forbidden=0):
    """Yield every 2-linked subset of side that contains root, has at most
    max_size vertices and avoids forbidden, each exactly once.

    Binary include/exclude branching on the G² frontier: every decision about
    a frontier vertex is made once, so every set has a unique derivation.
    """
    allowed = g.side_mask(side) & ~forbidden
    if max_size < 1 or not (allowed >> root) & 1:
        return
    start = 1 << root
    yield start
    if max_size == 1:
        return
    stack = [(start, g.square[root] & allowed, 0, 1)]
    while stack:
        current, frontier, excluded, size = stack.pop()
        if not frontier:
            continue
        w_bit = frontier & -frontier
        rest = frontier ^ w_bit
        stack.append((current, rest, excluded | w_bit, size))
        grown = current | w_bit
        yield grown
        if size + 1 < max_size:
            w = w_bit.bit_length() - 1
            extra = g.square[w] & allowed & ~grown & ~excluded
            stack.append((grown, rest | extra, excluded, size + 1))


def count_two_linked(g, v, ell):
    """Number of 2-linked subsets of v's side with exactly ell vertices containing v."""
    if ell < 1:
        raise ParameterError('ell must be at least 1')
    return sum(1 for mask in iter_two_linked(g, v, g.side_of(v), ell) if popcount(mask) == ell)


def two_linked_bound(d, ell):
    """(e d²)^(ell-1)."""
    return (math.e * d * d) ** (ell - 1)
