from ...graphs import popcount
from ...mcmc import ChainSpec, run_replicas
from ...reports import write_samples
from ...sampler import BRUTE_FORCE_CHOICES, DEFECT_CONVENTIONS, RESTRICTED_Z_MODES, IsingSampler, SamplerConfig
from ._common import IsingCommand, parse_start


class Command(IsingCommand):
    help = 'Draw configurations with the polymer sampler or by running Glauber chains'

    randomized = True

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--method',
            choices=['polymer', 'glauber', 'flips'],
            default='polymer',
            help='Sampler (default: polymer)'
        )
        parser.add_argument(
            '--count',
            type=int,
            default=1,
            help='Number of samples (default: 1)'
        )
        parser.add_argument(
            '--steps',
            type=int,
            default=1000,
            help='Chain steps per sample for glauber/flips (default: 1000)'
        )
        parser.add_argument(
            '--start',
            type=str,
            default='empty',
            help='Chain start: empty, full, even, odd or a vertex list (default: empty)'
        )
        parser.add_argument(
            '--k',
            type=int,
            help=('Truncation order override for the polymer sampler. With truncated restricted Z the '
                  'certified k0 exceeds the enumeration budgets above cycle:4, so pass --k there')
        )
        parser.add_argument(
            '--epsilon',
            type=float,
            default=0.1,
            help='Target accuracy epsilon (default: 0.1)'
        )
        parser.add_argument(
            '--kappa',
            type=float,
            default=0.0,
            help='Expansion exponent kappa (default: 0)'
        )
        parser.add_argument(
            '--delta2',
            type=int,
            help='Codegree bound (default: the graph maximum)'
        )
        parser.add_argument(
            '--restricted-z',
            choices=RESTRICTED_Z_MODES,
            default='auto',
            help='Restricted partition functions: exact, truncated or auto (default: auto)'
        )
        parser.add_argument(
            '--brute-force',
            choices=BRUTE_FORCE_CHOICES,
            default='auto',
            help='Exact Gibbs sampling: auto (epsilon <= epsilon0), always or never'
        )
        parser.add_argument(
            '--defect-convention',
            choices=DEFECT_CONVENTIONS,
            default='literal',
            help='Defect side weights from L (literal) or exp(L)'
        )
        parser.add_argument(
            '--automorphism',
            action='append',
            help='Side-swapping automorphism file(s) for the flips chain'
        )
        parser.add_argument(
            '--all-coordinates',
            action='store_true',
            help='Flips chain picks a uniformly random coordinate flip'
        )

    def run(self, **options):
        g = self.graph
        p = self.params()
        count = options['count']
        if options['method'] == 'polymer':
            cfg = SamplerConfig(
                epsilon=options['epsilon'],
                restricted_z=options['restricted_z'],
                k_override=options['k'],
                seed=options['seed'],
                brute_force=options['brute_force'],
                defect_convention=options['defect_convention'],
                kappa=options['kappa'],
                delta2=options['delta2'],
            )
            sampler = IsingSampler(g, p, cfg)
            samples = sampler.sample_many(count, self.rng())
            for flag in sampler.flags:
                self.stdout.write(self.style.WARNING(f'Flag: {flag}'))
        else:
            spec = ChainSpec.for_graph(g, options['method'], p, seed=self.seed(),
                                       automorphisms=self.automorphisms(),
                                       all_coordinates=options['all_coordinates'])
            start = parse_start(g, options['start'])
            samples = run_replicas(g, spec, start, options['steps'], count, threads=self.threads())

        mean_size = sum(popcount(s) for s in samples) / max(count, 1)
        self.stdout.write(self.style.SUCCESS(f'Drew {count} samples from {g} (mean size {mean_size:.4g})'))
        path = self.out_path('samples.jsonl')
        if path is not None:
            write_samples(path, samples)
            self.stdout.write(f'Wrote {path}')
