"""Tests for polymers, decorations and polymer systems."""
import math
from fractions import Fraction

from django.test import SimpleTestCase

from ..exceptions import PolymerError
from ..graphs import Side, generate_graph, mask_of
from ..polymer import (
    SUM,
    PolymerSystem,
    closure_ok,
    decorate,
    decorated_weight,
    decoration_probability,
    enumerate_polymers,
    incompatible,
    iter_decorations,
    make_polymer,
    polymer_weight,
    recover_configuration,
)
from ..spin_model import IsingParams

PAIRS = [(Fraction(1), Fraction(1, 2)), (Fraction(3, 2), Fraction(1, 3)), (Fraction(1, 5), Fraction(1, 5))]


def exact(lam, q):
    return IsingParams.create(lam, q=q)


def singleton_weight(lam, q, d):
    return lam * ((1 + lam * q) / (1 + lam)) ** d


class EnumerationTest(SimpleTestCase):
    """Test polymer enumeration."""

    def test_hypercube_singletons(self):
        """Test that Q^3 polymers are the four Even singletons."""
        g = generate_graph('hypercube:3')
        polymers = enumerate_polymers(g, Side.EVEN, 4)
        self.assertEqual([poly.vertices for poly in polymers], [[0], [3], [5], [6]])
        self.assertTrue(all(poly.closure_size == 1 for poly in polymers))

    def test_cycle_has_no_polymers(self):
        """Test that every nonempty set of C4 breaks the closure constraint."""
        g = generate_graph('cycle:4')
        self.assertEqual(enumerate_polymers(g, Side.ODD, 2), [])
        self.assertEqual(enumerate_polymers(g, Side.EVEN, 2), [])

    def test_canonical_order(self):
        """Test that polymers come sorted by size and then vertices."""
        g = generate_graph('hypercube:4')
        polymers = enumerate_polymers(g, Side.EVEN, 3)
        keys = [poly.sort_key() for poly in polymers]
        self.assertEqual(keys, sorted(keys))
        self.assertEqual(len(keys), len(set(keys)))
        self.assertEqual(sum(1 for poly in polymers if poly.size == 1), 8)

    def test_count_bound(self):
        """Test that polymer counts stay below (n/2) k (e d^2)^(k-1)."""
        g = generate_graph('hypercube:4')
        for k in range(1, 4):
            count = len(enumerate_polymers(g, Side.ODD, k))
            self.assertLessEqual(count, g.n // 2 * k * (math.e * g.d ** 2) ** (k - 1))

    def test_invalid_k(self):
        """Test that k must be positive."""
        with self.assertRaises(PolymerError):
            enumerate_polymers(generate_graph('hypercube:3'), Side.EVEN, 0)

    def test_make_polymer_checks(self):
        """Test that make_polymer enforces 2-linkage and closure."""
        q4 = generate_graph('hypercube:4')
        with self.assertRaises(PolymerError):
            make_polymer(q4, mask_of([0, 15]), Side.EVEN)
        with self.assertRaises(PolymerError):
            make_polymer(generate_graph('cycle:4'), mask_of([0]), Side.ODD)
        self.assertEqual(make_polymer(q4, mask_of([0, 3]), Side.EVEN).size, 2)

    def test_closure_ok(self):
        """Test the three-quarters threshold."""
        g = generate_graph('hypercube:3')
        self.assertTrue(closure_ok(g, mask_of([0, 3, 5])))
        self.assertFalse(closure_ok(g, g.even_mask))


class WeightTest(SimpleTestCase):
    """Test polymer weights."""

    def test_hypercube_singleton(self):
        """Test omega({v}) = lam ((1 + lam q)/(1 + lam))^3 on Q^3."""
        g = generate_graph('hypercube:3')
        poly = enumerate_polymers(g, Side.EVEN, 1)[0]
        for lam, q in PAIRS:
            self.assertEqual(polymer_weight(g, poly, exact(lam, q)), singleton_weight(lam, q, 3))

    def test_product_equals_sum(self):
        """Test that the product form equals the literal sum over decorations."""
        for spec in ('hypercube:3', 'hypercube:4'):
            g = generate_graph(spec)
            polymers = enumerate_polymers(g, Side.EVEN, 3)
            for lam, q in PAIRS:
                p = exact(lam, q)
                with self.subTest(spec=spec, lam=lam, q=q):
                    for poly in polymers:
                        self.assertEqual(polymer_weight(g, poly, p), polymer_weight(g, poly, p, mode=SUM))

    def test_free_and_hard_core_limits(self):
        """Test q = 1 gives lam^|A| and q = 0 gives lam^|A| / (1 + lam)^|N(A)|."""
        g = generate_graph('hypercube:4')
        lam = Fraction(2, 3)
        for poly in enumerate_polymers(g, Side.EVEN, 2):
            self.assertEqual(polymer_weight(g, poly, exact(lam, 1)), lam ** poly.size)
            expected = lam ** poly.size / (1 + lam) ** bin(poly.neighborhood).count('1')
            self.assertEqual(polymer_weight(g, poly, exact(lam, 0)), expected)

    def test_weight_bounds(self):
        """Test 0 < omega(A) <= lam^|A|."""
        g = generate_graph('hypercube:4')
        p = exact('3/2', '1/3')
        for poly in enumerate_polymers(g, Side.ODD, 3):
            w = polymer_weight(g, poly, p)
            self.assertGreater(w, 0)
            self.assertLessEqual(w, p.lam ** poly.size)

    def test_unknown_mode(self):
        """Test that an unknown weight mode is rejected."""
        g = generate_graph('hypercube:3')
        poly = enumerate_polymers(g, Side.EVEN, 1)[0]
        with self.assertRaises(PolymerError):
            polymer_weight(g, poly, exact(1, 0), mode='bogus')


class DecorationTest(SimpleTestCase):
    """Test decorated polymers."""

    def setUp(self):
        """Set up the Q^3 singleton {0}."""
        self.g = generate_graph('hypercube:3')
        self.poly = enumerate_polymers(self.g, Side.EVEN, 1)[0]

    def test_decorated_weight(self):
        """Test lam^2 q / (1 + lam)^3 for one decorating neighbor."""
        dp = decorate(self.g, self.poly, mask_of([1]))
        self.assertEqual(dp.edges_ab, 1)
        self.assertEqual(decorated_weight(dp, exact(1, '1/2')), Fraction(1, 16))

    def test_decorations_sum_to_weight(self):
        """Test that the decorated weights add up to omega(A)."""
        for lam, q in PAIRS:
            p = exact(lam, q)
            total = sum(decorated_weight(dp, p) for dp in iter_decorations(self.g, self.poly))
            self.assertEqual(total, polymer_weight(self.g, self.poly, p))

    def test_hard_core_decorations(self):
        """Test that q = 0 gives nonempty decorations weight 0."""
        p = exact(1, 0)
        for dp in iter_decorations(self.g, self.poly):
            if dp.b:
                self.assertEqual(decorated_weight(dp, p), 0)

    def test_decoration_outside_neighborhood(self):
        """Test that B must lie inside N(A)."""
        with self.assertRaises(PolymerError):
            decorate(self.g, self.poly, mask_of([7]))

    def test_decoration_probability(self):
        """Test lam q^j / (1 + lam q^j)."""
        self.assertEqual(decoration_probability(exact(1, '1/2'), 1), Fraction(1, 3))


class CompatibilityTest(SimpleTestCase):
    """Test polymer compatibility."""

    def test_self_incompatible(self):
        """Test that a polymer is incompatible with itself."""
        g = generate_graph('hypercube:3')
        poly = enumerate_polymers(g, Side.EVEN, 1)[0]
        self.assertTrue(incompatible(g, poly, poly))

    def test_distance_two(self):
        """Test that Q^3 singletons at distance 2 are incompatible."""
        g = generate_graph('hypercube:3')
        first, second = enumerate_polymers(g, Side.EVEN, 1)[:2]
        self.assertTrue(incompatible(g, first, second))

    def test_antipodal_compatible(self):
        """Test that antipodal Q^4 singletons are compatible with disjoint neighborhoods."""
        g = generate_graph('hypercube:4')
        first = make_polymer(g, mask_of([0]), Side.EVEN)
        second = make_polymer(g, mask_of([15]), Side.EVEN)
        self.assertFalse(incompatible(g, first, second))
        self.assertEqual(first.neighborhood & second.neighborhood, 0)

    def test_compatible_neighborhoods_disjoint(self):
        """Test that compatible polymers always have disjoint neighborhoods."""
        g = generate_graph('hypercube:4')
        polymers = enumerate_polymers(g, Side.EVEN, 2)
        for first in polymers:
            for second in polymers:
                if not incompatible(g, first, second):
                    self.assertEqual(first.neighborhood & second.neighborhood, 0)

    def test_different_sides(self):
        """Test that polymers on different sides cannot be compared."""
        g = generate_graph('hypercube:3')
        even = enumerate_polymers(g, Side.EVEN, 1)[0]
        odd = enumerate_polymers(g, Side.ODD, 1)[0]
        with self.assertRaises(PolymerError):
            incompatible(g, even, odd)


class RecoveryTest(SimpleTestCase):
    """Test reading a polymer configuration off a vertex set."""

    def test_empty_set(self):
        """Test that the empty set is the empty configuration."""
        config = recover_configuration(generate_graph('hypercube:3'), 0, Side.EVEN)
        self.assertEqual(len(config), 0)

    def test_rejection(self):
        """Test that a C4 vertex breaks the closure constraint."""
        self.assertIsNone(recover_configuration(generate_graph('cycle:4'), mask_of([0]), Side.ODD))

    def test_single_polymer(self):
        """Test that {0, 1} on Q^3 is the polymer {0} decorated by {1}."""
        g = generate_graph('hypercube:3')
        config = recover_configuration(g, mask_of([0, 1]), Side.EVEN)
        self.assertEqual(len(config), 1)
        dp = config.polymers[0]
        self.assertEqual(dp.a, mask_of([0]))
        self.assertEqual(dp.b, mask_of([1]))
        self.assertEqual(config.vertices, mask_of([0, 1]))
        self.assertEqual(config.defect, mask_of([0]))

    def test_configuration_weight(self):
        """Test that the configuration weight multiplies decorated weights."""
        g = generate_graph('hypercube:4')
        config = recover_configuration(g, mask_of([0, 15, 1]), Side.EVEN)
        self.assertEqual(len(config), 2)
        p = exact(1, '1/2')
        expected = decorated_weight(config.polymers[0], p) * decorated_weight(config.polymers[1], p)
        self.assertEqual(config.weight(p), expected)


class PolymerSystemTest(SimpleTestCase):
    """Test polymer systems and their partition functions."""

    def test_hypercube_partition(self):
        """Test Xi_E(Q^3) = 1 + 4 omega."""
        g = generate_graph('hypercube:3')
        lam, q = Fraction(1), Fraction(3, 10)
        system = PolymerSystem.build(g, Side.EVEN, exact(lam, q))
        self.assertEqual(system.partition(), 1 + 4 * singleton_weight(lam, q, 3))

    def test_empty_system(self):
        """Test that a side without polymers has Xi = 1."""
        system = PolymerSystem.build(generate_graph('cycle:4'), Side.ODD, exact(1, 0))
        self.assertEqual(len(system), 0)
        self.assertEqual(system.partition(), 1)

    def test_families_match_partition(self):
        """Test that summing over compatible families reproduces Xi on Q^4."""
        g = generate_graph('hypercube:4')
        system = PolymerSystem.build(g, Side.EVEN, exact(1, '1/2'), k=2)
        total = sum(system.family_weight(indices) for indices in system.iter_families())
        self.assertEqual(total, system.partition())
        self.assertEqual(system.count_families(), sum(1 for _ in system.iter_families()))

    def test_allowed_mask(self):
        """Test exclusion by vertex and by anchored polymer."""
        g = generate_graph('hypercube:3')
        system = PolymerSystem.build(g, Side.EVEN, exact(1, '1/2'))
        self.assertEqual(system.allowed_mask(excluded=mask_of([0])), 0b1110)
        self.assertEqual(system.allowed_mask(anchored=(0,)), 0)

    def test_index_mask(self):
        """Test selection of polymers by size."""
        g = generate_graph('hypercube:4')
        system = PolymerSystem.build(g, Side.EVEN, exact(1, '1/2'), k=2)
        self.assertEqual(bin(system.index_mask(1)).count('1'), 8)
        self.assertEqual(system.index_mask(), system.full_mask)
