import math

from ...numeric import LogWeight
from ...spin_model import classical_params, classical_weight, independence_polynomial, partition_exact
from ._common import IsingCommand, format_value


class Command(IsingCommand):
    help = 'Exact partition function by exhaustive enumeration'

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--classical',
            action='store_true',
            help='Also evaluate the equivalent +-1 spin model (float)'
        )

    def run(self, **options):
        g = self.graph
        p = self.params()
        Z = partition_exact(g, p)
        self.stdout.write(format_value(Z))

        payload = {'graph': g.name, 'n': g.n, 'd': g.d, 'params': p.as_dict(), 'Z': Z,
                   'log_Z': LogWeight.from_float(Z).log}
        if p.hard_core:
            payload['independence_polynomial'] = independence_polynomial(g, p.lam)

        if options['classical']:
            J, h, shift = classical_params(float(p.lam), p.beta, g.d)
            if math.isinf(p.beta):
                self.stdout.write(self.style.WARNING('The +-1 spin form needs a finite beta; skipped'))
            else:
                total = math.fsum(classical_weight(g, s, J, h, shift) for s in range(1 << g.n))
                rel = abs(1 - total / float(Z))
                self.stdout.write(f'Spin model sum: {total!r} (J={J!r}, h={h!r}; relative difference {rel:.3g})')
                payload['classical'] = {'J': J, 'h': h, 'shift': shift, 'Z': total, 'rel_diff': rel}

        self.emit('exact_z', payload)
