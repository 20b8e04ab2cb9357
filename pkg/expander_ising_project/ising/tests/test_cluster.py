"""Tests for Ursell functions, cluster expansions and the truncation order."""
import math
from fractions import Fraction

import networkx as nx
from django.test import SimpleTestCase, override_settings

from ..cluster import (
    TailBoundInputs,
    cluster_expansion,
    compute_L,
    enumerate_clusters,
    g_tilde,
    k0_candidates,
    select_k0,
    ursell,
    ursell_deletion_contraction,
    xi_exact,
)
from ..exceptions import BudgetExceededError, ParameterError
from ..graphs import Side, generate_graph
from ..numeric import FLOAT
from ..polymer import PolymerSystem
from ..spin_model import IsingParams


def exact(lam, q):
    return IsingParams.create(lam, q=q)


def q3_weight(lam, q):
    return lam * ((1 + lam * q) / (1 + lam)) ** 3


class UrsellTest(SimpleTestCase):
    """Test the Ursell function."""

    def test_small_graphs(self):
        """Test phi on K1, K2, P3 and K3."""
        self.assertEqual(ursell(nx.empty_graph(1)), 1)
        self.assertEqual(ursell(nx.complete_graph(2)), Fraction(-1, 2))
        self.assertEqual(ursell(nx.path_graph(3)), Fraction(1, 6))
        self.assertEqual(ursell(nx.complete_graph(3)), Fraction(1, 3))

    def test_disconnected_graph(self):
        """Test that a disconnected graph has phi = 0."""
        self.assertEqual(ursell(nx.empty_graph(2)), 0)

    def test_matches_deletion_contraction(self):
        """Test agreement with deletion-contraction on every connected graph up to 5 vertices."""
        checked = 0
        for h in nx.graph_atlas_g():
            if not 1 <= h.number_of_nodes() <= 5 or not nx.is_connected(h):
                continue
            self.assertEqual(ursell(h), ursell_deletion_contraction(h))
            checked += 1
        self.assertEqual(checked, 1 + 1 + 2 + 6 + 21)

    def test_sign_alternates(self):
        """Test that (-1)^(|V|-1) phi(H) > 0 for connected H."""
        for m in range(1, 6):
            h = nx.complete_graph(m)
            self.assertGreater((-1) ** (m - 1) * ursell(h), 0)

    def test_empty_graph(self):
        """Test that the graph with no vertices is rejected."""
        with self.assertRaises(ParameterError):
            ursell(nx.Graph())

    @override_settings(ISING_BUDGETS={'ursell_vertices': 3})
    def test_budget(self):
        """Test that large incompatibility graphs respect the budget."""
        with self.assertRaises(BudgetExceededError):
            ursell(nx.complete_graph(4))


class ClusterTest(SimpleTestCase):
    """Test cluster enumeration and truncated expansions."""

    def setUp(self):
        """Set up the Q^3 Even polymer system."""
        self.g = generate_graph('hypercube:3')
        self.lam = self.q = Fraction(1, 5)
        self.p = exact(self.lam, self.q)
        self.x = q3_weight(self.lam, self.q)
        self.system = PolymerSystem.build(self.g, Side.EVEN, self.p)

    def test_cluster_counts(self):
        """Test 4 clusters of size 1 and 14 of size at most 2."""
        self.assertEqual(len(list(enumerate_clusters(self.system, 1))), 4)
        clusters = list(enumerate_clusters(self.system, 2))
        self.assertEqual(len(clusters), 14)
        repeated = [c for c in clusters if len(set(c.indices)) == 1 and c.size == 2]
        self.assertEqual(len(repeated), 4)
        self.assertTrue(all(c.orderings == 1 for c in repeated))

    def test_cluster_graph(self):
        """Test that a pair of distinct polymers has the K2 incompatibility graph."""
        pair = next(c for c in enumerate_clusters(self.system, 2) if len(set(c.indices)) == 2)
        self.assertEqual(pair.orderings, 2)
        self.assertEqual(pair.incompat_graph.number_of_edges(), 1)

    def test_second_order_term(self):
        """Test that L_2 is the ordered-pair sum -1/2 (sum omega)^2."""
        per_size, _ = cluster_expansion(self.system, 2)
        self.assertEqual(dict(per_size)[2], -Fraction(1, 2) * (4 * self.x) ** 2)

    def test_log_series(self):
        """Test L_j = (-1)^(j+1) (4 omega)^j / j for mutually incompatible singletons."""
        per_size, count = cluster_expansion(self.system, 6)
        for j, value in per_size:
            self.assertEqual(value, (-1) ** (j + 1) * (4 * self.x) ** j / j)
        self.assertGreater(count, 0)

    def test_truncation_converges(self):
        """Test that exp(L_<=k) approaches Xi_E monotonically on Q^3."""
        p = IsingParams.create(0.2, q=0.2, mode=FLOAT)
        xi = 1 + 4 * float(q3_weight(Fraction(1, 5), Fraction(1, 5)))
        errors = [abs(compute_L(self.g, Side.EVEN, k, p).xi_estimate - xi) for k in range(1, 7)]
        self.assertTrue(all(b <= a for a, b in zip(errors, errors[1:])))
        self.assertLess(errors[-1], 3e-3)

    def test_first_order(self):
        """Test L_<=1 = 4 omega."""
        result = compute_L(self.g, Side.EVEN, 1, self.p)
        self.assertEqual(result.value, 4 * self.x)
        self.assertEqual(result.polymer_count, 4)
        self.assertEqual(result.below(2), 4 * self.x)

    def test_no_polymers(self):
        """Test that C4 has L = 0 at every order."""
        g = generate_graph('cycle:4')
        for k in range(1, 4):
            self.assertEqual(compute_L(g, Side.ODD, k, exact(1, '1/2')).value, 0)

    def test_invalid_order(self):
        """Test that k must be positive."""
        with self.assertRaises(ParameterError):
            compute_L(self.g, Side.EVEN, 0, self.p)

    def test_xi_exact(self):
        """Test Xi_E(Q^3) = 1 + 4 omega and Xi = 1 without polymers."""
        self.assertEqual(xi_exact(self.g, Side.EVEN, self.p), 1 + 4 * self.x)
        self.assertEqual(xi_exact(generate_graph('cycle:4'), Side.ODD, self.p), 1)

    def test_float_matches_exact(self):
        """Test that float and exact expansions agree."""
        exact_value = compute_L(self.g, Side.EVEN, 4, self.p).value
        float_value = compute_L(self.g, Side.EVEN, 4, IsingParams.create(0.2, q=0.2, mode=FLOAT)).value
        self.assertAlmostEqual(float_value, float(exact_value))

    @override_settings(ISING_BUDGETS={'cluster_multisets': 5})
    def test_multiset_budget(self):
        """Test that cluster enumeration respects its budget."""
        with self.assertRaises(BudgetExceededError):
            compute_L(self.g, Side.EVEN, 3, self.p)


class TruncationOrderTest(SimpleTestCase):
    """Test the tail exponent and k0 selection."""

    def inputs(self, n=1024, d=10, kappa=0.5, epsilon=0.1):
        return TailBoundInputs(n=n, d=d, kappa=kappa, delta2=2, lam=1.0, q=0.5, epsilon=epsilon)

    def test_alpha_tilde(self):
        """Test (1 + lam)/(1 + lam q)."""
        self.assertAlmostEqual(self.inputs().alpha_tilde, 4 / 3)

    def test_third_regime(self):
        """Test g(k) = k / d^(kappa+1) beyond d^3 log n."""
        inputs = TailBoundInputs(n=1000, d=10, kappa=1, delta2=2, lam=1.0, q=0.5, epsilon=0.1)
        self.assertAlmostEqual(g_tilde(10 ** 5, inputs), 1000.0)

    def test_second_regime(self):
        """Test g(k) = sqrt(d) k log(alpha) / 2 in the middle range."""
        inputs = self.inputs()
        self.assertAlmostEqual(g_tilde(100, inputs), math.sqrt(10) * 100 / 2 * math.log(4 / 3))

    def test_first_regime(self):
        """Test the small-k branch below d / log log d."""
        inputs = self.inputs(d=100)
        k = 5
        self.assertLess(k, inputs.first_regime_end)
        expected = (100 * k - 2 * k * k) * math.log(inputs.alpha_tilde) - 7.5 * k * math.log(100)
        self.assertAlmostEqual(g_tilde(k, inputs), expected)

    def test_empty_first_regime(self):
        """Test that the first regime is empty when log log d <= 0."""
        self.assertEqual(self.inputs(d=2).first_regime_end, 0.0)

    def test_candidates(self):
        """Test the three k0 candidates for n = 1024, d = 10, kappa = 1/2, epsilon = 0.1."""
        candidates, target = k0_candidates(self.inputs())
        self.assertEqual(candidates[:2], (6931, 6932))
        self.assertAlmostEqual(target, math.log(16 * 1024 / (10 ** 1.5 * 0.1)))
        self.assertEqual(candidates[2], math.ceil(10 ** 1.5 * target))

    def test_selection_certified(self):
        """Test that the smallest qualifying candidate is chosen."""
        selection = select_k0(self.inputs())
        self.assertTrue(selection.certified)
        self.assertEqual(selection.k0, min(selection.candidates))
        self.assertGreaterEqual(g_tilde(selection.k0, self.inputs()), selection.target)

    def test_selection_monotone(self):
        """Test that k0 does not decrease when epsilon halves or n doubles."""
        base = select_k0(self.inputs()).k0
        self.assertGreaterEqual(select_k0(self.inputs(epsilon=0.05)).k0, base)
        self.assertGreaterEqual(select_k0(self.inputs(n=2048)).k0, base)

    def test_restricted_target(self):
        """Test the restricted target log(160 n^3 / (eps^2 d^(kappa+1)))."""
        _, target = k0_candidates(self.inputs(), restricted=True)
        self.assertAlmostEqual(target, math.log(160 * 1024 ** 3 / (0.01 * 10 ** 1.5)))

    def test_small_graph_selection(self):
        """Test that an uncertified selection falls back to the largest candidate."""
        g = generate_graph('hypercube:3')
        selection = select_k0(TailBoundInputs.for_graph(g, exact(1, '1/2'), 0.1))
        self.assertGreaterEqual(selection.k0, 1)
        if not selection.certified:
            self.assertEqual(selection.k0, max(selection.candidates))

    def test_invalid_inputs(self):
        """Test input validation."""
        with self.assertRaises(ParameterError):
            self.inputs(epsilon=0)
        with self.assertRaises(ParameterError):
            g_tilde(0, self.inputs())
