from ...budgets import get_budget
from ...cluster import TailBoundInputs, compute_L, g_tilde, select_k0, xi_exact
from ...graphs import Side
from ...polymer import enumerate_polymers
from ._common import IsingCommand, format_value


class Command(IsingCommand):
    help = 'Per-size cluster expansion terms L_j, polymer counts and the k0 selection'

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--k',
            type=int,
            default=4,
            help=('Largest cluster size (default: 4). The reported k0 is only a selection; it exceeds '
                  'the enumeration budgets above cycle:4 and is never expanded')
        )
        parser.add_argument(
            '--side',
            choices=['odd', 'even', 'both'],
            default='both',
            help='Polymer side (default: both)'
        )
        parser.add_argument(
            '--epsilon',
            type=float,
            default=0.1,
            help='Accuracy for the k0 selection (default: 0.1)'
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

    def run(self, **options):
        g = self.graph
        p = self.params()
        k = options['k']
        sides = [Side.ODD, Side.EVEN] if options['side'] == 'both' else [Side(options['side'])]

        payload = {'graph': g.name, 'params': p.as_dict(), 'k': k, 'sides': {}}
        for side in sides:
            polymers = enumerate_polymers(g, side, k)
            truncation = compute_L(g, side, k, p)
            entry = {'polymers': len(polymers), 'truncation': truncation}
            self.stdout.write(f'{side.value}: {len(polymers)} polymers of size <= {k}, '
                              f'{truncation.ledger_count} clusters')
            for j, value in truncation.per_size:
                self.stdout.write(f'  L_{j} = {format_value(value)}')
            self.stdout.write(f'  L_<={k} = {format_value(truncation.value)}')
            if g.n <= get_budget('exact_report_vertices'):
                xi = xi_exact(g, side, p)
                entry['xi'] = xi
                self.stdout.write(f'  Xi = {format_value(xi)}, exp(L) = {truncation.xi_estimate!r}')
            payload['sides'][side.value] = entry

        inputs = TailBoundInputs.for_graph(g, p, options['epsilon'], options['kappa'], options['delta2'])
        selection = select_k0(inputs)
        restricted = select_k0(inputs, restricted=True)
        style = self.style.SUCCESS if selection.certified else self.style.WARNING
        self.stdout.write(style(f'k0 = {selection.k0} (candidates {selection.candidates}, '
                                f'certified: {selection.certified})'))
        self.stdout.write(f"k0' = {restricted.k0} (certified: {restricted.certified})")
        payload['k0'] = selection
        payload['k0_restricted'] = restricted
        payload['g_tilde'] = [[c, g_tilde(c, inputs)] for c in selection.candidates if c >= 1]
        self.emit('cluster_report', payload)
