"""
``expander_ising <subcommand> [flags]``: dispatches to the management
commands and returns the process exit code (0 ok, 2 validation, 3 budget).
"""

import sys

from django.core.management import call_command
from django.core.management.base import CommandError

SUBCOMMANDS = (
    'gen',
    'validate',
    'exact-z',
    'approx-z',
    'sample',
    'mix',
    'conductance',
    'percolation-check',
    'cluster-report',
)

USAGE = 'usage: expander_ising {%s} [flags]' % ','.join(SUBCOMMANDS)


def run(argv=None, stdout=None, stderr=None):
    """Run one subcommand; returns the exit code instead of raising."""
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    if not argv or argv[0] in ('-h', '--help'):
        stdout.write(USAGE + '\n')
        return 0 if argv else 2
    name = argv[0]
    if name not in SUBCOMMANDS:
        stderr.write(f'Unknown subcommand: {name}\n{USAGE}\n')
        return 2
    try:
        call_command(name.replace('-', '_'), *argv[1:], stdout=stdout, stderr=stderr)
    except CommandError as e:
        stderr.write(f'Error: {e}\n')
        # argparse usage errors arrive with the default returncode 1
        return 2 if e.returncode == 1 else e.returncode
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    return 0
