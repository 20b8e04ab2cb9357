from ...sampler import SamplerConfig, approx_Z
from ._common import IsingCommand, format_value


class Command(IsingCommand):
    help = 'Approximate Z from truncated cluster expansions of the two polymer models'

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--k',
            type=int,
            help=('Truncation order (default: k0 from the tail bound). The certified k0 exceeds the '
                  'enumeration budgets on anything larger than cycle:4, so pass --k there')
        )
        parser.add_argument(
            '--epsilon',
            type=float,
            default=0.1,
            help='Target accuracy epsilon in (0, 1] (default: 0.1)'
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
        cfg = SamplerConfig(epsilon=options['epsilon'], k_override=options['k'], kappa=options['kappa'],
                            delta2=options['delta2'])
        report = approx_Z(g, p, cfg)

        self.stdout.write(f'Z_hat = {format_value(report.z_hat)} (k0 = {report.k0})')
        self.stdout.write(f'L_E = {format_value(report.L_E.value)}, L_O = {format_value(report.L_O.value)}')
        self.stdout.write(f'Z_hat (L sum) = {format_value(report.z_hat_literal)}')
        if report.exact_Z is not None:
            self.stdout.write(f'Z = {format_value(report.exact_Z)}')
            self.stdout.write(f'Relative error: {report.rel_err:.6g} (untruncated polymer models: {report.rel_err_ideal:.6g})')
        for flag in report.flags:
            self.stdout.write(self.style.WARNING(f'Flag: {flag}'))
        self.emit('approx_z', report)
