from ...mcmc import ChainKind, ChainSpec, compare_flip_curves, exact_mixing_time, exact_tv_curve
from ...reports import is_nonincreasing, write_comparison_csv, write_tv_csv
from ._common import IsingCommand, parse_start


class Command(IsingCommand):
    help = 'Exact TV-distance curves for Glauber dynamics with and without flips'

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--chain',
            choices=['glauber', 'flips', 'both'],
            default='glauber',
            help='Chain(s) to iterate (default: glauber)'
        )
        parser.add_argument(
            '--t-max',
            type=int,
            default=200,
            help='Number of steps (default: 200)'
        )
        parser.add_argument(
            '--start',
            type=str,
            default='even',
            help='Start state: empty, full, even, odd or a vertex list (default: even)'
        )
        parser.add_argument(
            '--mixing-time',
            action='store_true',
            help='Also compute the worst-start mixing time tau(1/4) from the dense matrix'
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
        start = parse_start(g, options['start'])
        t_max = options['t_max']
        autos = self.automorphisms()

        if options['chain'] == 'both':
            curves = compare_flip_curves(g, p, start, t_max, automorphisms=autos,
                                         all_coordinates=options['all_coordinates'])
            path = self.out_path('tv_compare.csv')
            if path is not None:
                write_comparison_csv(path, curves)
            kinds = list(curves)
        else:
            spec = ChainSpec.for_graph(g, options['chain'], p, automorphisms=autos,
                                       all_coordinates=options['all_coordinates'])
            curves = {spec.kind.value: exact_tv_curve(g, spec, start, t_max)}
            kinds = [spec.kind.value]

        payload = {'graph': g.name, 'params': p.as_dict(), 't_max': t_max, 'chains': {}}
        for kind in kinds:
            curve = curves[kind]
            path = self.out_path(f'tv_{kind}.csv' if len(kinds) > 1 else 'tv.csv')
            if path is not None:
                write_tv_csv(path, curve)
            monotone = is_nonincreasing(curve)
            style = self.style.SUCCESS if monotone else self.style.WARNING
            self.stdout.write(style(f'{kind}: TV at t={t_max} is {float(curve[-1][1]):.6g} '
                                    f'(nonincreasing: {str(monotone).lower()})'))
            entry = {'final_tv': curve[-1][1], 'nonincreasing': monotone}
            if options['mixing_time']:
                spec = ChainSpec.for_graph(g, ChainKind(kind), p, automorphisms=autos,
                                           all_coordinates=options['all_coordinates'])
                tau = exact_mixing_time(g, spec)
                entry['mixing_time'] = tau
                self.stdout.write(f'{kind}: tau_mix(1/4) = {tau}')
            payload['chains'][kind] = entry
        self.emit('mix', payload)
