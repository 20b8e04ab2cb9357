from ...graphs import write_edge_list
from ._common import IsingCommand


class Command(IsingCommand):
    help = 'Generate a bipartite regular graph and write it as an edge list'

    uses_params = False

    def add_command_arguments(self, parser):
        parser.add_argument(
            '--out',
            type=str,
            required=True,
            help='Edge list output path (readable back with --graph file:<path>)'
        )

    def run(self, **options):
        g = self.graph
        path = write_edge_list(g, options['out'])
        self.manifest.outputs.append(str(path))
        self.stdout.write(self.style.SUCCESS(
            f'Wrote {g}: {g.num_edges} edges, sides of {g.side_size} to {path}'
        ))
