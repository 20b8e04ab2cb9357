"""
Glauber dynamics and Glauber-with-flips: seeded trajectories, the exact
transition operator, TV curves, exact mixing times and the even/odd
bottleneck conductance.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from .budgets import check_budget
from .exceptions import GraphValidationError, ParameterError
from .graphs import apply_permutation, popcount, validate_automorphism
from .numeric import LogWeight
from .spin_model import Distribution, evaluate_terms, gibbs_exact, subset_statistics

logger = logging.getLogger(__name__)

BLOCK = 4096


class ChainKind(str, Enum):
    GLAUBER = 'glauber'
    FLIPS = 'flips'


@dataclass(frozen=True)
class ChainSpec:
    kind: ChainKind
    params: object
    seed: int = None
    automorphisms: tuple = ()

    @classmethod
    def for_graph(cls, g, kind, params, seed=None, automorphisms=None, all_coordinates=False):
        """Validated spec; flips chains default to the graph's built-in coordinate flip."""
        kind = ChainKind(kind)
        perms = ()
        if kind is ChainKind.FLIPS:
            if automorphisms:
                perms = tuple(automorphisms)
            elif g.flips:
                perms = g.flips if all_coordinates else g.flips[:1]
            else:
                raise GraphValidationError(
                    f'{g.name}: no built-in flip automorphism; supply one with --automorphism'
                )
            perms = tuple(validate_automorphism(g, perm) for perm in perms)
        return cls(kind, params, seed, perms)

    @property
    def flip_automorphism(self):
        return self.automorphisms[0] if self.automorphisms else None


def make_rng(seed, replica=0):
    """Counter-based Philox stream; one independent stream per replica index."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(replica,))))


def add_probability(p, j):
    """lam q^j / (1 + lam q^j)."""
    weight = p.lam * p.q ** j
    return weight / (1 + weight)


def _resample(g, s, v, u, add_probs):
    bit = 1 << v
    if u < add_probs[popcount(g.neighbors[v] & s)]:
        return s | bit
    return s & ~bit


def _add_table(g, p):
    return [float(add_probability(p, j)) for j in range(g.d + 1)]


def glauber_step(g, s, p, rng):
    """Resample one uniformly random vertex from its conditional distribution."""
    v = int(rng.integers(g.n))
    return _resample(g, s, v, rng.random(), _add_table(g, p))


def flip_step(g, s, spec, rng):
    """Glauber step, then with probability 1/2 apply a uniformly chosen flip automorphism."""
    if spec.kind is not ChainKind.FLIPS or not spec.automorphisms:
        raise ParameterError('flip_step needs a flips chain spec with at least one automorphism')
    s = glauber_step(g, s, spec.params, rng)
    if rng.random() < 0.5:
        pick = int(rng.integers(len(spec.automorphisms))) if len(spec.automorphisms) > 1 else 0
        s = apply_permutation(s, spec.automorphisms[pick])
    return s


def iter_chain(g, spec, s0, t, rng):
    """Yield the t successive states after s0, drawing randomness in blocks."""
    add_probs = _add_table(g, spec.params)
    flips = spec.kind is ChainKind.FLIPS
    autos = spec.automorphisms
    s = s0
    remaining = t
    while remaining > 0:
        size = min(BLOCK, remaining)
        vertices = rng.integers(g.n, size=size)
        uniforms = rng.random(size)
        if flips:
            coins = rng.random(size)
            picks = rng.integers(len(autos), size=size)
        for i in range(size):
            s = _resample(g, s, int(vertices[i]), uniforms[i], add_probs)
            if flips and coins[i] < 0.5:
                s = apply_permutation(s, autos[int(picks[i])])
            yield s
        remaining -= size


def run_chain(g, spec, s0, t, replica=0):
    """State after t steps; reproducible given (seed, replica, s0, t)."""
    if t < 0:
        raise ParameterError('t must be nonnegative')
    s = s0
    for s in iter_chain(g, spec, s0, t, make_rng(spec.seed, replica)):
        pass
    return s


def run_replicas(g, spec, s0, t, replicas, threads=None):
    """Independent replicas, one Philox stream each; results in replica order."""
    workers = threads or os.cpu_count() or 1
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(lambda r: run_chain(g, spec, s0, t, replica=r), range(replicas)))


def empirical_occupation(g, spec, s0, t, replica=0):
    """Visit counts per state along a t-step trajectory."""
    check_budget('chain_vertices', g.n)
    visits = np.fromiter(iter_chain(g, spec, s0, t, make_rng(spec.seed, replica)), dtype=np.int64, count=t)
    return np.bincount(visits, minlength=1 << g.n)


# ---------------------------------------------------------------------------
# Exact transition operator
# ---------------------------------------------------------------------------

def permute_states(states, perm):
    image = np.zeros_like(states)
    for v, target in enumerate(perm):
        image |= ((states >> v) & 1) << target
    return image


class TransitionOperator:
    """Matrix-free one-step operator on distributions over the 2^n states."""

    def __init__(self, g, spec):
        check_budget('chain_vertices', g.n)
        self.g = g
        self.spec = spec
        self.exact = spec.params.exact
        self.size = 1 << g.n
        states = np.arange(self.size, dtype=np.int64)
        self.add = [add_probability(spec.params, j) for j in range(g.d + 1)]
        if not self.exact:
            self.add = np.array([float(a) for a in self.add])
        self.moves = []
        for v in range(g.n):
            low = states[((states >> v) & 1) == 0]
            j = np.zeros(len(low), dtype=np.int64)
            for u in range(g.n):
                if (g.neighbors[v] >> u) & 1:
                    j += (low >> u) & 1
            self.moves.append((low, low | (1 << v), j))
        self.flip_images = []
        if spec.kind is ChainKind.FLIPS:
            self.flip_images = [permute_states(states, perm) for perm in spec.automorphisms]

    def apply(self, dist):
        """One step: returns dist P as a new Distribution."""
        if self.exact:
            return Distribution(self._apply_exact(dist.probs), True)
        return Distribution(self._apply_float(np.asarray(dist.probs, dtype=float)), False)

    def _apply_float(self, x):
        y = np.zeros_like(x)
        for low, high, j in self.moves:
            a = self.add[j]
            mass = x[low] + x[high]
            y[high] += a * mass
            y[low] += (1 - a) * mass
        y /= self.g.n
        if self.flip_images:
            z = 0.5 * y
            share = 0.5 / len(self.flip_images)
            for image in self.flip_images:
                z[image] += share * y
            y = z
        return y

    def _apply_exact(self, x):
        y = [Fraction(0)] * self.size
        for low, high, j in self.moves:
            for lo, hi, jj in zip(low.tolist(), high.tolist(), j.tolist()):
                mass = x[lo] + x[hi]
                if mass:
                    a = self.add[jj]
                    y[hi] += a * mass
                    y[lo] += (1 - a) * mass
        n = self.g.n
        y = [value / n for value in y]
        if self.flip_images:
            z = [value / 2 for value in y]
            share = Fraction(1, 2 * len(self.flip_images))
            for image in self.flip_images:
                for state, target in enumerate(image.tolist()):
                    if y[state]:
                        z[target] += share * y[state]
            y = z
        return y

    def transition_row(self, state):
        """{target: P(state, target)} in the operator's numeric mode."""
        g = self.g
        row = {}
        for v in range(g.n):
            a = self.add[popcount(g.neighbors[v] & state)]
            on, off = state | (1 << v), state & ~(1 << v)
            row[on] = row.get(on, 0) + a / g.n
            row[off] = row.get(off, 0) + (1 - a) / g.n
        if self.flip_images:
            flipped = {}
            share = Fraction(1, 2 * len(self.flip_images)) if self.exact else 0.5 / len(self.flip_images)
            for target, prob in row.items():
                flipped[target] = flipped.get(target, 0) + prob / 2
                for perm in self.spec.automorphisms:
                    image = apply_permutation(target, perm)
                    flipped[image] = flipped.get(image, 0) + share * prob
            row = flipped
        return row

    def transition_matrix(self):
        """Dense float matrix; only for small n."""
        check_budget('dense_chain_vertices', self.g.n)
        P = np.zeros((self.size, self.size))
        for state in range(self.size):
            for target, prob in self.transition_row(state).items():
                P[state, target] += float(prob)
        return P


def exact_tv_curve(g, spec, s0, t_max):
    """[(t, TV(P^t(s0, .), mu))] for t = 0..t_max by iterating the exact operator."""
    op = TransitionOperator(g, spec)
    mu = gibbs_exact(g, spec.params)
    dist = Distribution.point_mass(op.size, s0, op.exact)
    curve = [(0, dist.tv_distance(mu))]
    for t in range(1, t_max + 1):
        dist = op.apply(dist)
        curve.append((t, dist.tv_distance(mu)))
    return curve


def exact_mixing_time(g, spec, eps=0.25, t_limit=1 << 24):
    """Worst-start tau_mix(eps) from exact powers of the dense transition matrix.

    Uses repeated squaring and then binary search; valid because the TV
    distance from each start is nonincreasing in t.
    """
    op = TransitionOperator(g, spec)
    P = op.transition_matrix()
    pi = gibbs_exact(g, spec.params).as_array()
    eps = float(eps)

    def worst(M):
        return 0.5 * float(np.abs(M - pi).sum(axis=1).max())

    if worst(np.eye(op.size)) <= eps:
        return 0
    powers = [P]
    while worst(powers[-1]) > eps:
        if 1 << len(powers) > t_limit:
            logger.warning(f'{g.name}: mixing time exceeds {t_limit} steps')
            return None
        powers.append(powers[-1] @ powers[-1])
    if len(powers) == 1:
        return 1
    t = 1 << (len(powers) - 2)
    M = powers[-2]
    for i in range(len(powers) - 3, -1, -1):
        candidate = M @ powers[i]
        if worst(candidate) > eps:
            M = candidate
            t += 1 << i
    return t + 1


def compare_flip_curves(g, params, s0, t_max, automorphisms=None, all_coordinates=False):
    """TV curves of plain Glauber and Glauber-with-flips from the same start."""
    curves = {}
    for kind in (ChainKind.GLAUBER, ChainKind.FLIPS):
        spec = ChainSpec.for_graph(g, kind, params, automorphisms=automorphisms, all_coordinates=all_coordinates)
        curves[kind.value] = exact_tv_curve(g, spec, s0, t_max)
    return curves


# ---------------------------------------------------------------------------
# Conductance of the even/odd bottleneck
# ---------------------------------------------------------------------------

@dataclass
class MixingReport:
    tv_curve: list
    conductance_SE: object
    weight_balanced: object
    bound_rhs: object
    conductance_SO: object = None
    boundary_flow: object = None
    mu_SE: object = None
    weight_SE: object = None
    weight_SO: object = None
    bound_ratio: object = None
    partition: object = None
    flow_bound_holds: bool = None
    bound_holds: bool = None
    mixing_time: int = None
    extra_curves: dict = field(default_factory=dict)


def _ratio(a, b, exact):
    if exact:
        return a / b
    return float(LogWeight.from_float(a) / LogWeight.from_float(b))


def _boundary_terms(g, states, sizes, edges, k_major, k_minor, major_mask, p):
    """Terms (count, k, m, P(leave)) for the states one step inside a majority class."""
    width = g.num_edges + 1
    sel = k_major == k_minor + 1
    st, sz, ed = states[sel], sizes[sel], edges[sel]
    d1 = g.d + 1
    keys = []
    for v in range(g.n):
        in_s = (st >> v) & 1
        j = np.zeros(len(st), dtype=np.int64)
        for u in range(g.n):
            if (g.neighbors[v] >> u) & 1:
                j += (st >> u) & 1
        if (major_mask >> v) & 1:
            leaving, direction = in_s == 1, 0
        else:
            leaving, direction = in_s == 0, 1
        base = (sz[leaving] * width + ed[leaving]) * d1 + j[leaving]
        keys.append(base * 2 + direction)
    if not keys:
        return []
    counts = np.bincount(np.concatenate(keys))
    terms = []
    for key in np.nonzero(counts)[0].tolist():
        rest, direction = divmod(key, 2)
        rest, j = divmod(rest, d1)
        k, m = divmod(rest, width)
        a = add_probability(p, j)
        factor = a if direction == 1 else 1 - a
        factor = factor / g.n if p.exact else float(factor) / g.n
        terms.append((int(counts[key]), k, m, factor))
    return terms


def conductance_exact(g, p):
    """Exact Q(S_E, S_E^c), mu(S_E), Phi(S_E) and the balanced-set bound."""
    check_budget('chain_vertices', g.n)
    width = g.num_edges + 1
    states, sizes, edges = subset_statistics(g, 0, 1 << g.n)
    k_even = np.zeros(len(states), dtype=np.int64)
    for v in g.side_vertices('even'):
        k_even += (states >> v) & 1
    k_odd = sizes - k_even

    def class_counts(sel):
        counts = np.bincount(sizes[sel] * width + edges[sel], minlength=(g.n + 1) * width)
        return counts.reshape(g.n + 1, width)

    def weight(sel):
        counts = class_counts(sel)
        ks, ms = np.nonzero(counts)
        return evaluate_terms(((int(counts[k, m]), int(k), int(m), 1) for k, m in zip(ks, ms)), p)

    w_even = weight(k_even > k_odd)
    w_odd = weight(k_odd > k_even)
    w_bal = weight(k_even == k_odd)
    Z = w_even + w_odd + w_bal

    flow_even = evaluate_terms(_boundary_terms(g, states, sizes, edges, k_even, k_odd, g.even_mask, p), p)
    flow_odd = evaluate_terms(_boundary_terms(g, states, sizes, edges, k_odd, k_even, g.odd_mask, p), p)

    exact = p.exact
    half_cube = (1 + p.lam) ** (g.n // 2)
    report = MixingReport(
        tv_curve=[],
        conductance_SE=_ratio(flow_even, w_even, exact),
        weight_balanced=w_bal,
        bound_rhs=_ratio(w_bal, half_cube, exact),
        conductance_SO=_ratio(flow_odd, w_odd, exact),
        boundary_flow=_ratio(flow_even, Z, exact),
        mu_SE=_ratio(w_even, Z, exact),
        weight_SE=w_even,
        weight_SO=w_odd,
        bound_ratio=_ratio(w_bal, w_even, exact),
        partition=Z,
    )
    if exact:
        report.flow_bound_holds = flow_even <= w_bal
    else:
        report.flow_bound_holds = float(LogWeight.from_float(flow_even) / LogWeight.from_float(w_bal)) <= 1 + 1e-12
    report.bound_holds = report.conductance_SE <= report.bound_rhs
    logger.info(f'{g.name}: Phi(S_E) = {float(report.conductance_SE):.6g} at {p}')
    return report
