from django.core.management.base import CommandError

from ...graphs import CheckStatus, validate_class
from ._common import IsingCommand, format_value


class Command(IsingCommand):
    help = 'Check the expander class conditions and report witnesses'

    uses_params = False

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--kappa',
            type=float,
            default=0.0,
            help='Expansion exponent kappa used for the excess report (default: 0)'
        )
        parser.add_argument(
            '--delta2',
            type=int,
            help='Codegree bound to check against'
        )
        parser.add_argument(
            '--automorphism',
            action='append',
            help='Automorphism file(s) to validate as side-swapping automorphisms'
        )
        parser.add_argument(
            '--strict',
            action='store_true',
            help='Exit with code 2 when a checked condition is violated'
        )

    def run(self, **options):
        g = self.graph
        report = validate_class(g, delta2=options['delta2'], kappa=options['kappa'])
        for i, perm in enumerate(self.automorphisms(), start=1):
            self.stdout.write(self.style.SUCCESS(f'Automorphism {i}: valid side-swapping automorphism'))

        self.stdout.write(f'Graph: {g}')
        self.stdout.write(f'Max codegree: {report.max_codegree}')
        if report.codegree_ok is not None:
            style = self.style.SUCCESS if report.codegree_ok else self.style.ERROR
            self.stdout.write(style(f'Codegree <= {report.delta2}: {report.codegree_ok}'))

        for label, check in (('Expansion', report.expansion), ('Strong expansion', report.h_prime)):
            style = {
                CheckStatus.VERIFIED: self.style.SUCCESS,
                CheckStatus.VIOLATED: self.style.ERROR,
                CheckStatus.SKIPPED: self.style.WARNING,
            }[check.status]
            line = f'{label}: {check.status.value} (checked |X| <= {check.checked_size} of {check.required_size})'
            if check.witness:
                line += f'; witness {check.witness[0]} {check.witness[1]} with |N(X)| = {check.witness_neighborhood}'
            self.stdout.write(style(line))

        if report.expansion_ratio_min is not None:
            self.stdout.write(f'Min |N(X)|/|X|: {format_value(report.expansion_ratio_min)}')
        if report.size_ratio is not None:
            self.stdout.write(f'n / (d^6 log d): {report.size_ratio:.6g}')
        self.emit('validate', report)

        violated = CheckStatus.VIOLATED in (report.expansion.status, report.h_prime.status)
        if report.codegree_ok is False:
            violated = True
        if violated and options['strict']:
            raise CommandError(f'{g.name} is outside the expander class', returncode=2)
