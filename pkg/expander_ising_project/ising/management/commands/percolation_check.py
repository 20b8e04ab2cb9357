from django.core.management.base import CommandError

from ...numeric import EXACT, MODES, relative_error, to_exact
from ...spin_model import IsingParams, partition_exact, percolation_expectation
from ._common import IsingCommand, format_value


class Command(IsingCommand):
    help = 'Check E[Z_indep(G_p, lambda)] = Z(G; lambda, q = 1 - p) by enumerating edge subsets'

    uses_params = False

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--lambda',
            dest='lam',
            type=str,
            default='1',
            help='Fugacity lambda > 0 (default: 1)'
        )
        parser.add_argument(
            '--p',
            dest='p_edge',
            type=str,
            required=True,
            help='Edge retention probability p in [0, 1]'
        )
        parser.add_argument(
            '--mode',
            choices=MODES,
            default=EXACT,
            help='Numeric mode (default: exact)'
        )

    def run(self, **options):
        g = self.graph
        mode = options['mode']
        p_edge = to_exact(options['p_edge'])
        params = IsingParams.create(options['lam'], q=1 - p_edge, mode=mode)
        self.manifest.params = params.as_dict()

        lhs = percolation_expectation(g, params.lam, p_edge if mode == EXACT else float(p_edge), mode)
        rhs = partition_exact(g, params)
        if mode == EXACT:
            holds = lhs == rhs
        else:
            holds = relative_error(lhs, rhs) <= 1e-9

        self.stdout.write(f'E[Z(G_p)] = {format_value(lhs)}')
        self.stdout.write(f'Z(G; q=1-p) = {format_value(rhs)}')
        style = self.style.SUCCESS if holds else self.style.ERROR
        self.stdout.write(style(f'identity holds: {str(holds).lower()}'))
        self.emit('percolation_check', {'graph': g.name, 'params': params.as_dict(), 'p': p_edge,
                                        'expectation': lhs, 'Z': rhs, 'holds': holds})
        if not holds:
            raise CommandError('percolation identity failed', returncode=2)
