"""Tests for ising models."""
from datetime import timedelta

from django.test import TestCase
from django.utils import timezone

from ..models import RunRecord


class RunRecordModelTest(TestCase):
    """Test RunRecord model."""

    def setUp(self):
        """Set up test data."""
        self.record = RunRecord.objects.create(
            subcommand='exact-z',
            graph_spec='hypercube:3',
            params={'lambda': '1', 'q': '1/2', 'mode': 'exact'},
            manifest={'schema': 1, 'outputs': ['exact_z.json']},
            out_dir='/tmp/q3',
        )

    def test_str_representation(self):
        """Test string representation."""
        self.assertEqual(str(self.record), 'exact-z hypercube:3 (exit 0)')

    def test_defaults(self):
        """Test default values."""
        self.assertIsNone(self.record.seed)
        self.assertEqual(self.record.exit_code, 0)
        self.assertIsNotNone(self.record.created_at)
        self.assertIsNotNone(self.record.updated_at)

    def test_json_fields(self):
        """Test that params and manifest round-trip through the database."""
        record = RunRecord.objects.get(pk=self.record.pk)
        self.assertEqual(record.params['q'], '1/2')
        self.assertEqual(record.manifest['outputs'], ['exact_z.json'])

    def test_ordering(self):
        """Test that the newest record comes first."""
        RunRecord.objects.filter(pk=self.record.pk).update(created_at=timezone.now() - timedelta(hours=1))
        newer = RunRecord.objects.create(subcommand='sample', graph_spec='cycle:4', seed=7, exit_code=2)
        self.assertEqual(list(RunRecord.objects.all()), [newer, self.record])
        self.assertEqual(RunRecord.objects.filter(subcommand='sample').get().seed, 7)
