"""
Approximate sampling and counting through the two one-sided polymer models.

A configuration is drawn by picking a defect side D, drawing a decorated
polymer configuration on D vertex by vertex (each step weighted by the
restricted polymer partition function that remains), and filling the
opposite side outside N(D) with independent lam/(1+lam) coins.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .budgets import get_budget
from .cluster import K0Selection, TailBoundInputs, cluster_expansion, compute_L, select_k0, xi_exact
from .exceptions import ParameterError
from .graphs import Side, members, popcount
from .numeric import LogWeight, relative_error
from .polymer import (
    PolymerSystem,
    decorate,
    decorated_weight,
    decoration_probability,
    degrees_into,
    iter_decorations,
    recover_configuration,
)
from .spin_model import Distribution, config_weights, gibbs_exact, partition_exact

logger = logging.getLogger(__name__)

EXACT_Z = 'exact'
TRUNCATED_Z = 'truncated'
AUTO = 'auto'
RESTRICTED_Z_MODES = (EXACT_Z, TRUNCATED_Z, AUTO)

LITERAL = 'literal'
EXP = 'exp'
DEFECT_CONVENTIONS = (LITERAL, EXP)

BRUTE_FORCE_CHOICES = ('auto', 'always', 'never')


def epsilon0(n, d, kappa=0):
    """exp(-n / (d^(kappa+4) log d)); 0 when d = 1."""
    if d <= 1:
        return 0.0
    return math.exp(-n / (d ** (kappa + 4) * math.log(d)))


@dataclass(frozen=True)
class SamplerConfig:
    epsilon: float = 0.1
    restricted_z: str = AUTO
    k_override: int = None
    seed: int = None
    brute_force: str = 'auto'
    defect_convention: str = LITERAL
    kappa: float = 0
    delta2: int = None

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise ParameterError(f'epsilon must lie in (0, 1], got {self.epsilon}')
        if self.restricted_z not in RESTRICTED_Z_MODES:
            raise ParameterError(f'restricted_z must be one of {RESTRICTED_Z_MODES}')
        if self.brute_force not in BRUTE_FORCE_CHOICES:
            raise ParameterError(f'brute_force must be one of {BRUTE_FORCE_CHOICES}')
        if self.defect_convention not in DEFECT_CONVENTIONS:
            raise ParameterError(f'defect_convention must be one of {DEFECT_CONVENTIONS}')
        if self.k_override is not None and self.k_override < 1:
            raise ParameterError('k must be at least 1')

    def restricted_mode(self, g):
        """Exact restricted partition functions up to the chain budget, truncated beyond."""
        if self.restricted_z != AUTO:
            return self.restricted_z
        return EXACT_Z if g.n <= get_budget('chain_vertices') else TRUNCATED_Z

    def use_brute_force(self, g):
        if self.brute_force == 'always':
            return True
        if self.brute_force == 'never':
            return False
        return self.epsilon <= epsilon0(g.n, g.d, self.kappa)

    def restricted_epsilon(self, n):
        """epsilon' = epsilon^2 / (160 n^2)."""
        return self.epsilon ** 2 / (160 * n * n)


# ---------------------------------------------------------------------------
# Restricted polymer models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RestrictedModel:
    """Decorated polymers avoiding ``excluded`` and compatible with the anchored ones."""

    system: PolymerSystem
    excluded: int = 0
    anchored: tuple = ()

    @cached_property
    def allowed(self):
        return self.system.allowed_mask(self.excluded, self.anchored)

    def extend(self, v, chosen=None):
        """Model after processing v, optionally anchoring polymer ``chosen``."""
        anchored = self.anchored if chosen is None else self.anchored + (chosen,)
        return RestrictedModel(self.system, self.excluded | (1 << v), anchored)


def restricted_L(rm, k):
    """Truncated cluster expansion of the restricted model."""
    per_size, _ = cluster_expansion(rm.system, k, rm.allowed)
    values = [v for _, v in per_size]
    return sum(values, Fraction(0)) if rm.system.params.exact else math.fsum(values)


def restricted_Z(rm, p, cfg, k=None):
    """Z of the restricted model: exact sum, or exp of its truncated cluster expansion."""
    if cfg.restricted_mode(rm.system.g) == EXACT_Z:
        return rm.system.partition(rm.allowed)
    if k is None:
        raise ParameterError('truncated restricted Z needs a truncation order')
    return math.exp(float(restricted_L(rm, k)))


def fundamental_identity_check(rm, v, p):
    """(Z(P(T, S)), Z(P(T, S+v)) + sum over (A, B) with v in A of w(A, B) Z(P(T+(A,B), S+v)))."""
    system = rm.system
    allowed = rm.allowed
    lhs = system.partition(allowed)
    rhs = system.partition(allowed & ~system.containing[v])
    g = system.g
    for i in members(system.containing[v] & allowed):
        rest = system.partition(allowed & ~system.incompat[i])
        for dp in iter_decorations(g, system.polymers[i]):
            rhs += decorated_weight(dp, p) * rest
    return lhs, rhs


def iter_decision_states(system):
    """Yield (RestrictedModel, v) for every state the vertex-by-vertex sampler can reach."""
    verts = system.g.side_vertices(system.side)
    stack = [(RestrictedModel(system), 0)]
    while stack:
        rm, pos = stack.pop()
        if pos == len(verts):
            continue
        v = verts[pos]
        yield rm, v
        stack.append((rm.extend(v), pos + 1))
        for i in members(system.containing[v] & rm.allowed):
            stack.append((rm.extend(v, i), pos + 1))


class RestrictedPartition:
    """Memoized Z(allowed) in the exact or truncated convention."""

    def __init__(self, system, mode, k=None):
        self.system = system
        self.mode = mode
        self.k = k
        self._cache = {}

    def __call__(self, allowed):
        if self.mode == EXACT_Z:
            return self.system.partition(allowed)
        if allowed not in self._cache:
            per_size, _ = cluster_expansion(self.system, self.k, allowed)
            self._cache[allowed] = math.exp(math.fsum(float(v) for _, v in per_size))
        return self._cache[allowed]


# ---------------------------------------------------------------------------
# Sampler
# ---------------------------------------------------------------------------

def sample_defect_side(weight_odd, weight_even, rng):
    """Side drawn with probability proportional to the given nonnegative weights."""
    w_odd, w_even = float(weight_odd), float(weight_even)
    if w_odd < 0 or w_even < 0:
        raise ParameterError(f'defect side weights must be nonnegative, got {w_odd}, {w_even}')
    if w_odd + w_even == 0:
        raise ParameterError('both defect side weights are zero')
    return Side.ODD if rng.random() * (w_odd + w_even) < w_odd else Side.EVEN


class IsingSampler:
    """Approximate sampler for one (graph, params, config); polymer data is built lazily per side."""

    def __init__(self, g, p, cfg):
        self.g = g
        self.p = p
        self.cfg = cfg
        self.brute_force = cfg.use_brute_force(g)
        self.mode = cfg.restricted_mode(g)
        self.flags = []
        self._systems = {}
        self._partitions = {}
        self._truncations = {}

    @cached_property
    def k0_selection(self):
        if self.mode == EXACT_Z or self.cfg.k_override is not None:
            return None
        inputs = TailBoundInputs.for_graph(self.g, self.p, self.cfg.epsilon, self.cfg.kappa, self.cfg.delta2)
        selection = select_k0(inputs)
        if not selection.certified:
            self.flags.append('k0_uncertified')
        return selection

    @cached_property
    def restricted_k(self):
        if self.mode == EXACT_Z:
            return None
        if self.cfg.k_override is not None:
            return self.cfg.k_override
        inputs = TailBoundInputs.for_graph(self.g, self.p, self.cfg.epsilon, self.cfg.kappa, self.cfg.delta2)
        return select_k0(inputs, restricted=True).k0

    @property
    def k0(self):
        if self.mode == EXACT_Z:
            return None
        return self.cfg.k_override if self.cfg.k_override is not None else self.k0_selection.k0

    def system(self, side):
        side = Side(side)
        if side not in self._systems:
            k = None if self.mode == EXACT_Z else self.k0
            self._systems[side] = PolymerSystem.build(self.g, side, self.p, k)
        return self._systems[side]

    def partition(self, side):
        side = Side(side)
        if side not in self._partitions:
            self._partitions[side] = RestrictedPartition(self.system(side), self.mode, self.restricted_k)
        return self._partitions[side]

    def truncation(self, side):
        side = Side(side)
        if side not in self._truncations:
            self._truncations[side] = compute_L(self.g, side, self.k0, self.p, self.system(side))
        return self._truncations[side]

    @cached_property
    def side_weights(self):
        """(weight of Odd, weight of Even) for the defect side coin."""
        if self.mode == EXACT_Z:
            return self.system(Side.ODD).partition(), self.system(Side.EVEN).partition()
        l_odd, l_even = self.truncation(Side.ODD).value, self.truncation(Side.EVEN).value
        if self.cfg.defect_convention == LITERAL:
            if l_odd == 0 and l_even == 0:
                logger.warning(f'{self.g.name}: both truncations vanish; using exp(L) for the defect side')
                self.flags.append('defect_side_exp_fallback')
            elif l_odd >= 0 and l_even >= 0:
                return l_odd, l_even
            else:
                logger.warning(f'{self.g.name}: negative truncation; using exp(L) for the defect side')
                self.flags.append('defect_side_exp_fallback')
        return math.exp(float(l_odd)), math.exp(float(l_even))

    def side_probabilities(self):
        w_odd, w_even = self.side_weights
        total = w_odd + w_even
        return {Side.ODD: w_odd / total, Side.EVEN: w_even / total}

    def _step_weights(self, system, Z, allowed, v):
        candidates = members(system.containing[v] & allowed)
        weights = [Z(allowed & ~system.containing[v])]
        weights.extend(system.weights[i] * Z(allowed & ~system.incompat[i]) for i in candidates)
        return candidates, weights

    def _decorate(self, system, i, rng):
        poly = system.polymers[i]
        b = 0
        for u, j in degrees_into(self.g, poly):
            if rng.random() < float(decoration_probability(self.p, j)):
                b |= 1 << u
        return decorate(self.g, poly, b)

    def sample_configuration(self, side, rng):
        """Vertex-by-vertex draw of a decorated polymer configuration on ``side``."""
        side = Side(side)
        system = self.system(side)
        Z = self.partition(side)
        allowed = system.full_mask
        chosen = []
        for v in self.g.side_vertices(side):
            if not system.containing[v] & allowed:
                continue
            candidates, weights = self._step_weights(system, Z, allowed, v)
            floats = np.array([float(w) for w in weights])
            pick = int(np.searchsorted(np.cumsum(floats), rng.random() * floats.sum(), side='right'))
            pick = min(pick, len(floats) - 1)
            if pick:
                i = candidates[pick - 1]
                chosen.append(self._decorate(system, i, rng))
                allowed &= ~system.incompat[i]
            allowed &= ~system.containing[v]
        return system.configuration(chosen)

    def fill(self, side, config, rng):
        """Configuration vertices plus lam/(1+lam) coins on the opposite side outside N(defect)."""
        s = config.vertices
        free = self.g.side_mask(Side(side).other) & ~self.g.neighborhood(config.defect)
        prob = float(self.p.lam / (1 + self.p.lam))
        for u in members(free):
            if rng.random() < prob:
                s |= 1 << u
        return s

    def sample(self, rng):
        if self.brute_force:
            return int(gibbs_exact(self.g, self.p).sample(rng))
        side = sample_defect_side(*self.side_weights, rng)
        return self.fill(side, self.sample_configuration(side, rng), rng)

    def sample_many(self, count, rng):
        return [self.sample(rng) for _ in range(count)]

    def decision_leaves(self, side):
        """Yield (polymer indices, probability) for every leaf of the vertex-by-vertex decision tree."""
        side = Side(side)
        system = self.system(side)
        Z = self.partition(side)
        verts = self.g.side_vertices(side)
        stack = [(0, system.full_mask, (), self.p.one if self.mode == EXACT_Z else 1.0)]
        while stack:
            pos, allowed, chosen, prob = stack.pop()
            while pos < len(verts) and not system.containing[verts[pos]] & allowed:
                pos += 1
            if pos == len(verts):
                yield chosen, prob
                continue
            v = verts[pos]
            candidates, weights = self._step_weights(system, Z, allowed, v)
            total = sum(weights)
            if weights[0]:
                stack.append((pos + 1, allowed & ~system.containing[v], chosen, prob * weights[0] / total))
            for i, w in zip(candidates, weights[1:]):
                if w:
                    stack.append((pos + 1, allowed & ~system.incompat[i], chosen + (i,), prob * w / total))


def _expand_decorations(g, system, indices, prob, p):
    """Spread an undecorated leaf over its decorations: P(B | A) = w(A, B) / w(A)."""
    leaves = [((), prob)]
    for i in indices:
        poly, weight = system.polymers[i], system.weights[i]
        grown = []
        for decorated, base in leaves:
            for dp in iter_decorations(g, poly):
                grown.append((decorated + (dp,), base * decorated_weight(dp, p) / weight))
        leaves = grown
    for decorated, leaf_prob in leaves:
        yield system.configuration(decorated), leaf_prob


def sample_nu(g, side, p, cfg, rng, sampler=None):
    sampler = sampler or IsingSampler(g, p, cfg)
    return sampler.sample_configuration(side, rng)


def nu_decision_tree(g, side, p, cfg, sampler=None):
    """{PolymerConfiguration: probability} produced by the vertex-by-vertex sampler."""
    sampler = sampler or IsingSampler(g, p, cfg)
    system = sampler.system(side)
    out = {}
    for indices, prob in sampler.decision_leaves(side):
        for config, leaf_prob in _expand_decorations(g, system, indices, prob, p):
            out[config] = out.get(config, 0) + leaf_prob
    return out


def nu_exact(g, side, p):
    """{PolymerConfiguration: w(config) / Xi_D} over every valid decorated configuration."""
    system = PolymerSystem.build(g, side, p)
    xi = system.partition()
    out = {}
    for indices in system.iter_families():
        for config, leaf_prob in _expand_decorations(g, system, indices, system.family_weight(indices) / xi, p):
            out[config] = leaf_prob
    return out


def sample_ising(g, p, cfg, rng):
    return IsingSampler(g, p, cfg).sample(rng)


def ising_decision_distribution(g, p, cfg, sampler=None):
    """Exact output distribution of the sampler over all 2^n configurations."""
    sampler = sampler or IsingSampler(g, p, cfg)
    if sampler.brute_force:
        return gibbs_exact(g, p)
    exact = p.exact and sampler.mode == EXACT_Z
    size = 1 << g.n
    probs = [Fraction(0)] * size if exact else np.zeros(size)
    coin = p.lam / (1 + p.lam) if exact else float(p.lam / (1 + p.lam))
    for side, side_prob in sampler.side_probabilities().items():
        for config, prob in nu_decision_tree(g, side, p, cfg, sampler).items():
            free = g.side_mask(side.other) & ~g.neighborhood(config.defect)
            free_vertices = members(free)
            base = config.vertices
            for bits in range(1 << len(free_vertices)):
                extra = 0
                for i, u in enumerate(free_vertices):
                    if (bits >> i) & 1:
                        extra |= 1 << u
                k = popcount(extra)
                weight = coin ** k * (1 - coin) ** (len(free_vertices) - k)
                probs[base | extra] += side_prob * prob * weight
    return Distribution(probs, exact)


# ---------------------------------------------------------------------------
# Exact approximate measure and Z estimate
# ---------------------------------------------------------------------------

def _side_validity(g, side):
    """valid[t] for every pattern t of the side's vertices (bit i = i-th vertex of the side)."""
    verts = g.side_vertices(side)
    valid = np.zeros(1 << len(verts), dtype=np.int64)
    for pattern in range(len(valid)):
        mask = 0
        for i, v in enumerate(verts):
            if (pattern >> i) & 1:
                mask |= 1 << v
        valid[pattern] = recover_configuration(g, mask, side) is not None
    return valid


def _side_pattern(states, verts):
    pattern = np.zeros(len(states), dtype=np.int64)
    for i, v in enumerate(verts):
        pattern |= ((states >> v) & 1) << i
    return pattern


@dataclass
class MuHatReport:
    distribution: Distribution
    z_hat: object
    tv: object
    w_hat_empty: object

    def as_dict(self):
        return {'z_hat': self.z_hat, 'tv': self.tv, 'w_hat_empty': self.w_hat_empty}


def mu_hat_exact(g, p):
    """mu_hat(S) = (1[S valid for Odd] + 1[S valid for Even]) w(S) / Z_hat, and TV(mu_hat, mu)."""
    weights = config_weights(g, p)
    states = np.arange(1 << g.n, dtype=np.int64)
    multiplicity = np.zeros(len(states), dtype=np.int64)
    for side in Side:
        verts = g.side_vertices(side)
        multiplicity += _side_validity(g, side)[_side_pattern(states, verts)]
    mu = gibbs_exact(g, p)
    if p.exact:
        w_hat = [int(m) * w for m, w in zip(multiplicity.tolist(), weights)]
        z_hat = sum(w_hat)
        dist = Distribution([w / z_hat for w in w_hat], True)
        return MuHatReport(dist, z_hat, dist.tv_distance(mu), w_hat[0])
    with np.errstate(divide='ignore'):
        log_w_hat = weights + np.log(multiplicity)
    z_hat = LogWeight.from_logs(log_w_hat)
    dist = Distribution(np.exp(log_w_hat - z_hat.log), False)
    return MuHatReport(dist, z_hat, dist.tv_distance(mu), float(multiplicity[0]))


@dataclass
class ApproxZReport:
    z_hat: object
    z_hat_literal: object
    L_E: object
    L_O: object
    k0: int
    selection: K0Selection = None
    flags: list = field(default_factory=list)
    exact_Z: object = None
    z_hat_ideal: object = None
    rel_err: float = None
    rel_err_literal: float = None
    rel_err_ideal: float = None

    def as_dict(self):
        return {
            'Z_hat': self.z_hat,
            'Z_hat_literal': self.z_hat_literal,
            'L_E': self.L_E.as_dict(),
            'L_O': self.L_O.as_dict(),
            'k0': self.k0,
            'k0_selection': self.selection.as_dict() if self.selection else None,
            'flags': list(self.flags),
            'exact_Z': self.exact_Z,
            'Z_hat_ideal': self.z_hat_ideal,
            'rel_err': self.rel_err,
            'rel_err_literal': self.rel_err_literal,
            'rel_err_ideal': self.rel_err_ideal,
        }


def approx_Z(g, p, cfg):
    """Z_hat = (1+lam)^{n/2} (exp(L_E) + exp(L_O)) with L the truncated expansions.

    The literal (1+lam)^{n/2} (L_E + L_O) is reported alongside. Up to the
    exact-report budget the exact Z and the untruncated (1+lam)^{n/2}(Xi_O + Xi_E)
    are computed too.
    """
    selection = None
    if cfg.k_override is not None:
        k0 = cfg.k_override
    else:
        selection = select_k0(TailBoundInputs.for_graph(g, p, cfg.epsilon, cfg.kappa, cfg.delta2))
        k0 = selection.k0
    flags = [] if selection is None or selection.certified else ['k0_uncertified']

    l_even = compute_L(g, Side.EVEN, k0, p)
    l_odd = compute_L(g, Side.ODD, k0, p)
    half = g.n // 2
    scale = LogWeight.from_log(half * math.log(float(1 + p.lam)))
    z_hat = scale * LogWeight.from_logs([float(l_even.value), float(l_odd.value)])
    if p.exact:
        z_literal = (1 + p.lam) ** half * (l_even.value + l_odd.value)
    else:
        z_literal = scale * (l_even.value + l_odd.value)

    report = ApproxZReport(z_hat, z_literal, l_even, l_odd, k0, selection, flags)
    if g.n <= get_budget('exact_report_vertices'):
        report.exact_Z = partition_exact(g, p)
        xi_sum = xi_exact(g, Side.ODD, p) + xi_exact(g, Side.EVEN, p)
        report.z_hat_ideal = (1 + p.lam) ** half * xi_sum if p.exact else scale * xi_sum
        report.rel_err = relative_error(z_hat, report.exact_Z)
        if z_literal:
            report.rel_err_literal = relative_error(z_literal, report.exact_Z)
        report.rel_err_ideal = relative_error(report.z_hat_ideal, report.exact_Z)
    logger.info(f'{g.name}: Z_hat = {z_hat} at k0={k0}')
    return report
