"""Tests for management commands and the expander_ising entry point."""
import json
import tempfile
from io import StringIO
from pathlib import Path
from unittest.mock import patch

from django.core.management import call_command, load_command_class
from django.core.management.base import CommandError
from django.test import TestCase, override_settings

from ..cli import run
from ..exceptions import BudgetExceededError
from ..models import RunRecord
from ..reports import load_comparison_csv, load_report, load_samples, load_tv_csv


class CommandTestMixin:
    """Helpers shared by the command tests."""

    def setUp(self):
        """Set up a temporary output directory."""
        self.tmp = tempfile.TemporaryDirectory()
        self.out = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def call(self, name, *args):
        out = StringIO()
        call_command(name, *args, stdout=out, stderr=StringIO())
        return out.getvalue()


class ExactZCommandTest(CommandTestMixin, TestCase):
    """Test exact_z management command."""

    def test_hard_core_cycle(self):
        """Test that Z(C4; 1, 0) = 7 is printed first."""
        output = self.call('exact_z', '--graph', 'cycle:4', '--lambda', '1', '--q', '0')
        self.assertEqual(output.splitlines()[0], '7')

    def test_rational_parameters(self):
        """Test that exact mode prints a reduced fraction."""
        output = self.call('exact_z', '--graph', 'cycle:2', '--lambda', '1/2', '--q', '1/3')
        # 1 + 2(1/2) + (1/4)(1/3)
        self.assertEqual(output.splitlines()[0], '25/12')

    def test_report_written(self):
        """Test the JSON report and manifest."""
        self.call('exact_z', '--graph', 'cycle:4', '--q', '0', '--out-dir', str(self.out))
        document = load_report(self.out / 'exact_z.json')
        self.assertEqual(document['data']['Z'], '7')
        self.assertEqual(document['data']['independence_polynomial'], '7')
        manifest = json.loads((self.out / 'manifest.json').read_text())
        self.assertEqual(manifest['subcommand'], 'exact-z')
        self.assertIn('exact_z.json', manifest['outputs'])

    def test_classical_form(self):
        """Test the +-1 spin model comparison in float mode."""
        output = self.call('exact_z', '--graph', 'cycle:4', '--beta', '0.5', '--mode', 'float', '--classical')
        self.assertIn('Spin model sum', output)

    def test_budget_exceeded(self):
        """Test that Q^5 exceeds the partition budget with exit code 3."""
        with self.assertRaises(CommandError) as ctx:
            self.call('exact_z', '--graph', 'hypercube:5', '--q', '1/2')
        self.assertEqual(ctx.exception.returncode, 3)

    def test_beta_in_exact_mode(self):
        """Test that --beta is refused in exact mode with exit code 2."""
        with self.assertRaises(CommandError) as ctx:
            self.call('exact_z', '--graph', 'cycle:4', '--beta', '1')
        self.assertEqual(ctx.exception.returncode, 2)

    def test_bad_graph_spec(self):
        """Test that a malformed graph spec exits with code 2."""
        with self.assertRaises(CommandError) as ctx:
            self.call('exact_z', '--graph', 'hypercube:x', '--q', '0')
        self.assertEqual(ctx.exception.returncode, 2)


class GenCommandTest(CommandTestMixin, TestCase):
    """Test gen management command."""

    def test_round_trip(self):
        """Test that a generated edge list gives the same Z as the generator."""
        path = self.out / 'q3.txt'
        output = self.call('gen', '--graph', 'hypercube:3', '--out', str(path))
        self.assertIn('12 edges', output)
        from_generator = self.call('exact_z', '--graph', 'hypercube:3', '--q', '1/2').splitlines()[0]
        from_file = self.call('exact_z', '--graph', f'file:{path}', '--q', '1/2').splitlines()[0]
        self.assertEqual(from_generator, from_file)

    def test_empty_graph_file(self):
        """Test that a graph file with no vertices exits with code 2."""
        path = self.out / 'empty.txt'
        path.write_text('0 0\n')
        with self.assertRaises(CommandError) as ctx:
            self.call('validate', '--graph', f'file:{path}')
        self.assertEqual(ctx.exception.returncode, 2)


class ValidateCommandTest(CommandTestMixin, TestCase):
    """Test validate management command."""

    def test_hypercube(self):
        """Test the report for Q^3."""
        output = self.call('validate', '--graph', 'hypercube:3', '--delta2', '2')
        self.assertIn('Max codegree: 2', output)
        self.assertIn('Expansion:', output)

    def test_violation_reported(self):
        """Test that K_{1,1} is reported but exits 0 without --strict."""
        output = self.call('validate', '--graph', 'cycle:2')
        self.assertIn('witness', output)

    def test_strict_violation(self):
        """Test that --strict turns a violation into exit code 2."""
        with self.assertRaises(CommandError) as ctx:
            self.call('validate', '--graph', 'cycle:2', '--strict')
        self.assertEqual(ctx.exception.returncode, 2)


class PercolationCheckCommandTest(CommandTestMixin, TestCase):
    """Test percolation_check management command."""

    def test_identity_holds(self):
        """Test the identity on Q^3 at p = 1/2."""
        output = self.call('percolation_check', '--graph', 'hypercube:3', '--lambda', '3/2', '--p', '1/2')
        self.assertIn('identity holds: true', output)

    def test_float_mode(self):
        """Test the identity in float mode."""
        output = self.call('percolation_check', '--graph', 'cycle:4', '--p', '0.3', '--mode', 'float')
        self.assertIn('identity holds: true', output)

    def test_failed_identity(self):
        """Test that a failed identity exits with code 2."""
        with patch(
            'expander_ising_project.ising.management.commands.percolation_check.percolation_expectation',
            return_value=0,
        ):
            with self.assertRaises(CommandError) as ctx:
                self.call('percolation_check', '--graph', 'cycle:4', '--p', '1/2')
        self.assertEqual(ctx.exception.returncode, 2)


class SampleCommandTest(CommandTestMixin, TestCase):
    """Test sample management command."""

    def sample(self, out_dir, *extra):
        return self.call('sample', '--graph', 'hypercube:3', '--q', '1/2', '--seed', '11', '--count', '25',
                         '--out-dir', str(out_dir), *extra)

    def test_seeded_samples_identical(self):
        """Test that the same seed writes the same samples."""
        self.sample(self.out / 'a', '--brute-force', 'never')
        self.sample(self.out / 'b', '--brute-force', 'never')
        first = (self.out / 'a' / 'samples.jsonl').read_bytes()
        second = (self.out / 'b' / 'samples.jsonl').read_bytes()
        self.assertEqual(first, second)
        self.assertEqual(len(load_samples(self.out / 'a' / 'samples.jsonl')), 25)

    def test_manifest_records_seed(self):
        """Test that the manifest lists the seed and the sample file."""
        output = self.sample(self.out)
        self.assertIn('Drew 25 samples', output)
        manifest = json.loads((self.out / 'manifest.json').read_text())
        self.assertEqual(manifest['seed'], 11)
        self.assertEqual(manifest['outputs'], ['samples.jsonl'])

    def test_glauber_method(self):
        """Test chain sampling with replicas."""
        self.sample(self.out, '--method', 'glauber', '--steps', '50', '--threads', '2')
        self.assertEqual(len(load_samples(self.out / 'samples.jsonl')), 25)

    @override_settings(ISING_CI=True)
    def test_seed_required_in_ci(self):
        """Test that randomized commands need --seed when ISING_CI is set."""
        with self.assertRaises(CommandError) as ctx:
            self.call('sample', '--graph', 'cycle:4', '--q', '1/2')
        self.assertEqual(ctx.exception.returncode, 2)


class MixCommandTest(CommandTestMixin, TestCase):
    """Test mix management command."""

    def test_single_chain(self):
        """Test the Glauber TV curve CSV."""
        output = self.call('mix', '--graph', 'cycle:4', '--q', '1/2', '--t-max', '20', '--out-dir', str(self.out))
        self.assertIn('nonincreasing: true', output)
        curve = load_tv_csv(self.out / 'tv.csv')
        self.assertEqual(len(curve), 21)

    def test_both_chains(self):
        """Test that --chain both writes the comparison and per-chain curves."""
        self.call('mix', '--graph', 'cycle:4', '--q', '1/2', '--t-max', '10', '--chain', 'both',
                  '--out-dir', str(self.out))
        for name in ('tv_compare.csv', 'tv_glauber.csv', 'tv_flips.csv', 'mix.json', 'manifest.json'):
            self.assertTrue((self.out / name).exists(), name)
        curves = load_comparison_csv(self.out / 'tv_compare.csv')
        self.assertEqual(set(curves), {'glauber', 'flips'})

    def test_both_chains_hypercube(self):
        """Test the float-mode Q^4 comparison CSV."""
        output = self.call('mix', '--graph', 'hypercube:4', '--lambda', '1', '--q', '0.1', '--mode', 'float',
                           '--t-max', '200', '--chain', 'both', '--out-dir', str(self.out))
        self.assertEqual(output.count('nonincreasing: true'), 2)
        curves = load_comparison_csv(self.out / 'tv_compare.csv')
        self.assertEqual(set(curves), {'glauber', 'flips'})
        self.assertEqual(len(curves['glauber']), 201)
        self.assertEqual(len(curves['flips']), 201)
        self.assertLess(curves['flips'][-1][1], curves['glauber'][-1][1])

    def test_mixing_time(self):
        """Test that the worst-start mixing time is reported."""
        output = self.call('mix', '--graph', 'cycle:4', '--q', '1/2', '--t-max', '5', '--mixing-time')
        self.assertIn('tau_mix(1/4)', output)


class ConductanceCommandTest(CommandTestMixin, TestCase):
    """Test conductance management command."""

    def test_cycle(self):
        """Test the printed conductance and bound lines."""
        output = self.call('conductance', '--graph', 'cycle:4', '--q', '1/2', '--mixing-time')
        self.assertIn('Phi(S_E) = ', output)
        self.assertIn('w(S_bal)/Z: true', output)
        self.assertIn('tau_mix(1/4)', output)

    def test_report(self):
        """Test the conductance JSON report."""
        self.call('conductance', '--graph', 'hypercube:3', '--q', '1/3', '--out-dir', str(self.out))
        data = load_report(self.out / 'conductance.json')['data']
        self.assertIn('conductance_SE', data)


class ClusterReportCommandTest(CommandTestMixin, TestCase):
    """Test cluster_report management command."""

    def test_hypercube(self):
        """Test per-size terms and the k0 selection on Q^3."""
        output = self.call('cluster_report', '--graph', 'hypercube:3', '--lambda', '1/5', '--q', '1/5', '--k', '3')
        self.assertIn('L_1 = ', output)
        self.assertIn('L_3 = ', output)
        self.assertIn('k0 = ', output)


class ApproxZCommandTest(CommandTestMixin, TestCase):
    """Test approx_z management command."""

    def test_report(self):
        """Test the approx_z report for C4 with an explicit order."""
        output = self.call('approx_z', '--graph', 'cycle:4', '--q', '0', '--k', '2', '--out-dir', str(self.out))
        self.assertIn('Z = 7', output)
        data = load_report(self.out / 'approx_z.json')['data']
        self.assertEqual(data['k0'], 2)
        self.assertEqual(data['exact_Z'], '7')
        self.assertEqual(data['Z_hat_ideal'], '8')

    def test_order_help(self):
        """Test that the --k help says the selected order needs an override above C4."""
        for name in ('approx_z', 'sample'):
            command = load_command_class('expander_ising_project.ising', name)
            text = ' '.join(command.create_parser('manage.py', name).format_help().split())
            self.assertIn('so pass --k there', text, name)


class RecordTest(CommandTestMixin, TestCase):
    """Test RunRecord creation from commands."""

    def test_record_flag(self):
        """Test that --record stores one row."""
        self.call('exact_z', '--graph', 'cycle:4', '--q', '0', '--record')
        record = RunRecord.objects.get()
        self.assertEqual(record.subcommand, 'exact-z')
        self.assertEqual(record.graph_spec, 'cycle:4')
        self.assertEqual(record.exit_code, 0)
        self.assertEqual(record.params['q'], '0')

    @patch('expander_ising_project.ising.management.commands.exact_z.partition_exact')
    def test_failed_run_recorded(self, mock_partition):
        """Test that failing runs are recorded with their exit code."""
        mock_partition.side_effect = BudgetExceededError('partition_vertices', 24, 32)
        with self.assertRaises(CommandError):
            self.call('exact_z', '--graph', 'cycle:4', '--q', '0', '--record')
        self.assertEqual(RunRecord.objects.get().exit_code, 3)

    @override_settings(ISING_RECORD_RUNS=True)
    def test_record_setting(self):
        """Test that ISING_RECORD_RUNS records without the flag."""
        self.call('percolation_check', '--graph', 'cycle:2', '--p', '1/2')
        self.assertEqual(RunRecord.objects.filter(subcommand='percolation-check').count(), 1)


class EntryPointTest(TestCase):
    """Test cli.run exit codes."""

    def run_cli(self, *argv):
        out, err = StringIO(), StringIO()
        code = run(list(argv), stdout=out, stderr=err)
        return code, out.getvalue(), err.getvalue()

    def test_success(self):
        """Test exit code 0 and the printed value."""
        code, out, _ = self.run_cli('exact-z', '--graph', 'cycle:4', '--lambda', '1', '--q', '0')
        self.assertEqual(code, 0)
        self.assertEqual(out.splitlines()[0], '7')

    def test_unknown_subcommand(self):
        """Test that an unknown subcommand exits with code 2."""
        code, _, err = self.run_cli('frobnicate')
        self.assertEqual(code, 2)
        self.assertIn('Unknown subcommand', err)

    def test_budget(self):
        """Test that a budget violation exits with code 3."""
        code, _, err = self.run_cli('exact-z', '--graph', 'hypercube:5', '--q', '0')
        self.assertEqual(code, 3)
        self.assertIn('partition_vertices', err)

    def test_bad_flag(self):
        """Test that argument errors exit with code 2."""
        code, _, _ = self.run_cli('exact-z', '--graph', 'cycle:4', '--bogus')
        self.assertEqual(code, 2)

    def test_help_and_empty(self):
        """Test --help exits 0 and no arguments exit 2."""
        self.assertEqual(self.run_cli('--help')[0], 0)
        code, out, _ = self.run_cli()
        self.assertEqual(code, 2)
        self.assertIn('usage', out)
