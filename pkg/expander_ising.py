#!/usr/bin/env python
"""Command-line entry point: ``./expander_ising.py exact-z --graph cycle:4 --lambda 1 --q 0``."""
import os
import sys


def main():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'expander_ising_project.settings')
    import django

    django.setup()
    from expander_ising_project.ising.cli import run

    sys.exit(run(sys.argv[1:]))


if __name__ == '__main__':
    main()
