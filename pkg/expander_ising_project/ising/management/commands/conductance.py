import math

from ...mcmc import ChainKind, ChainSpec, conductance_exact, exact_mixing_time, exact_tv_curve
from ...reports import write_tv_csv
from ._common import IsingCommand, format_value, parse_start


class Command(IsingCommand):
    help = 'Exact conductance of the even-majority set and the balanced-set bound'

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--t-max',
            type=int,
            default=0,
            help='Also write the Glauber TV curve for this many steps (default: 0, off)'
        )
        parser.add_argument(
            '--start',
            type=str,
            default='even',
            help='Start state for the TV curve (default: even)'
        )
        parser.add_argument(
            '--mixing-time',
            action='store_true',
            help='Compare the exact mixing time with 1/(4 Phi)'
        )

    def run(self, **options):
        g = self.graph
        p = self.params()
        report = conductance_exact(g, p)
        spec = ChainSpec.for_graph(g, ChainKind.GLAUBER, p)

        if options['t_max'] > 0:
            report.tv_curve = exact_tv_curve(g, spec, parse_start(g, options['start']), options['t_max'])
            path = self.out_path('tv.csv')
            if path is not None:
                write_tv_csv(path, report.tv_curve)

        self.stdout.write(f'Phi(S_E) = {format_value(report.conductance_SE)}')
        self.stdout.write(f'Phi(S_O) = {format_value(report.conductance_SO)}')
        self.stdout.write(f'mu(S_E) = {format_value(report.mu_SE)}')
        self.stdout.write(f'w(S_bal) = {format_value(report.weight_balanced)}')
        self.stdout.write(f'w(S_bal) / (1+lambda)^(n/2) = {format_value(report.bound_rhs)}')
        style = self.style.SUCCESS if report.flow_bound_holds else self.style.ERROR
        self.stdout.write(style(f'Q(S_E, S_E^c) <= w(S_bal)/Z: {str(report.flow_bound_holds).lower()}'))
        style = self.style.SUCCESS if report.bound_holds else self.style.WARNING
        self.stdout.write(style(f'Phi(S_E) <= w(S_bal)/(1+lambda)^(n/2): {str(report.bound_holds).lower()}'))

        if options['mixing_time']:
            report.mixing_time = exact_mixing_time(g, spec)
            phi = float(report.conductance_SE)
            lower = 1 / (4 * phi) if phi > 0 else math.inf
            self.stdout.write(f'tau_mix(1/4) = {report.mixing_time} (1/(4 Phi) = {lower:.6g})')
        self.emit('conductance', report)
