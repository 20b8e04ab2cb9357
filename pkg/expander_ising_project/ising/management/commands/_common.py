import json
import logging
from fractions import Fraction
from pathlib import Path

import numpy as np
from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from ...exceptions import IsingError, ParameterError
from ...graphs import Side, generate_graph, load_automorphism, mask_of
from ...mcmc import make_rng
from ...models import RunRecord
from ...numeric import EXACT, MODES, LogWeight
from ...reports import RunManifest, dumps, emit_report, write_manifest
from ...spin_model import IsingParams

logger = logging.getLogger(__name__)

# Options Django adds to every command; never part of a manifest
BASE_OPTIONS = {
    'verbosity', 'settings', 'pythonpath', 'traceback', 'no_color', 'force_color', 'skip_checks',
    'stdout', 'stderr',
}


def format_value(value):
    if isinstance(value, (Fraction, LogWeight)):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_start(g, text):
    """Start state: empty, full, even, odd, or a comma-separated vertex list."""
    text = (text or 'empty').strip().lower()
    if text == 'empty':
        return 0
    if text == 'full':
        return g.full_mask
    if text in ('even', 'odd'):
        return g.side_mask(Side(text))
    try:
        vertices = [int(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise ParameterError(f'Bad start state: {text!r}') from None
    if any(v < 0 or v >= g.n for v in vertices):
        raise ParameterError(f'Start state {vertices} has vertices outside 0..{g.n - 1}')
    return mask_of(vertices)


class IsingCommand(BaseCommand):
    """Shared flags, error translation and run recording for the ising subcommands."""

    uses_params = True
    randomized = False

    @property
    def subcommand(self):
        return self.__module__.rsplit('.', 1)[-1].replace('_', '-')

    def add_arguments(self, parser):
        parser.add_argument(
            '--graph',
            type=str,
            required=True,
            help='Graph spec: hypercube:d, torus:m^t, middle-layer:k, cycle:n, AxB, file:path'
        )
        if self.uses_params:
            parser.add_argument(
                '--lambda',
                dest='lam',
                type=str,
                default='1',
                help='Fugacity lambda > 0 (default: 1)'
            )
            weights = parser.add_mutually_exclusive_group()
            weights.add_argument(
                '--q',
                type=str,
                help='Per-edge factor q = exp(-beta) in [0, 1]'
            )
            weights.add_argument(
                '--beta',
                type=float,
                help='Inverse temperature; converted to q (float mode only)'
            )
            parser.add_argument(
                '--mode',
                choices=MODES,
                default=EXACT,
                help='Numeric mode (default: exact)'
            )
        if self.randomized:
            parser.add_argument(
                '--seed',
                type=int,
                help='Root seed (required when ISING_CI is set)'
            )
            parser.add_argument(
                '--threads',
                type=int,
                help='Worker threads (default: ISING_THREADS, 0 = all cores)'
            )
        parser.add_argument(
            '--out-dir',
            type=str,
            help='Directory for JSON/CSV artifacts and manifest.json'
        )
        parser.add_argument(
            '--record',
            action='store_true',
            help='Store a RunRecord row for this run'
        )
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def handle(self, *args, **options):
        self.options = options
        self._graph = None
        self.manifest = RunManifest(
            subcommand=self.subcommand,
            graph=options['graph'],
            flags={k: v for k, v in options.items() if k not in BASE_OPTIONS},
        )
        exit_code = 0
        try:
            self.run(**options)
        except IsingError as e:
            exit_code = e.exit_code
            raise CommandError(str(e), returncode=e.exit_code) from e
        except CommandError as e:
            exit_code = e.returncode
            raise
        finally:
            if options.get('out_dir') and self.manifest.outputs:
                write_manifest(options['out_dir'], self.manifest)
            if options.get('record') or settings.ISING_RECORD_RUNS:
                self.record(exit_code)

    def run(self, **options):
        raise NotImplementedError('subcommands implement run()')

    # Shared helpers

    @property
    def graph(self):
        if self._graph is None:
            self._graph = generate_graph(self.options['graph'])
        return self._graph

    def params(self, mode=None):
        options = self.options
        p = IsingParams.create(options['lam'], q=options.get('q'), beta=options.get('beta'),
                               mode=mode or options['mode'])
        self.manifest.params = p.as_dict()
        return p

    def seed(self):
        seed = self.options.get('seed')
        if seed is None:
            if settings.ISING_CI:
                raise ParameterError(f'{self.subcommand} is randomized: --seed is required when ISING_CI is set')
            seed = int(np.random.SeedSequence().entropy % (1 << 63))
            logger.info(f'No --seed given; using {seed}')
        self.manifest.seed = seed
        return seed

    def rng(self):
        return make_rng(self.seed())

    def threads(self, exact=False):
        if exact:
            return 1
        return self.options.get('threads') or settings.ISING_THREADS or None

    def automorphisms(self):
        paths = self.options.get('automorphism') or []
        return [load_automorphism(self.graph, path) for path in paths]

    def out_path(self, filename):
        out_dir = self.options.get('out_dir')
        if not out_dir:
            return None
        if filename not in self.manifest.outputs:
            self.manifest.outputs.append(filename)
        return Path(out_dir) / filename

    def emit(self, name, payload):
        out_dir = self.options.get('out_dir')
        if not out_dir:
            return None
        path = emit_report(out_dir, name, payload, self.manifest)
        self.stdout.write(f'Wrote {path}')
        return path

    def record(self, exit_code):
        manifest = json.loads(dumps(self.manifest.as_dict()))
        try:
            RunRecord.objects.create(
                subcommand=self.subcommand,
                graph_spec=self.options.get('graph') or '',
                params=manifest['params'],
                seed=self.manifest.seed,
                manifest=manifest,
                out_dir=self.options.get('out_dir') or '',
                exit_code=exit_code,
            )
        except Exception as e:
            self.stdout.write(self.style.WARNING(f'Could not record run: {e}'))
