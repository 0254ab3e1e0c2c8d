from ...channel import build_example1, load_channel
from ...exceptions import ArgumentError
from ...frontier import (
    DEFAULT_BUDGET,
    MODES,
    SEARCH_GRIDS,
    example1_sampler,
    frontier_csv,
    frontier_start,
    random_scheme_sampler,
    search_grid,
    trace_frontier_generic,
    trace_frontiers_example2,
)
from ..base import MacsenseCommand, RunConfig, logger, parse_grid, read_text

COLUMNS = ('mode,d2_bound,best_sum_rate,distortion,feasible,samples,monotonized,scheme,'
           'p_u0,p_u1_0,p_u1_1,p_u2_0,p_u2_1,xi1,xi2,e')


class Command(MacsenseCommand):
    help = f'Trace the maximum sum-rate against a bound on D2. CSV columns: {COLUMNS}'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        self.add_channel_arguments(parser)
        parser.add_argument(
            '--mode',
            choices=MODES + ('both',),
            default='both',
            help='Which region to maximize over (default both)',
        )
        parser.add_argument(
            '--d2-grid',
            type=str,
            default='0.005:0.085:0.0025',
            help='Distortion bounds as start:stop:step (inclusive) or a comma list',
        )
        parser.add_argument(
            '--budget',
            type=int,
            default=DEFAULT_BUDGET,
            help='Second example: refinement candidates per bound. Otherwise: random schemes drawn',
        )
        parser.add_argument(
            '--grid',
            choices=tuple(SEARCH_GRIDS),
            help='Second example: coarse search grid, fast (step 1/4) or full (step 1/16). '
                 'Default MACSENSE_FRONTIER_GRID',
        )
        parser.add_argument(
            '--seed',
            type=int,
            default=0,
            help='Seed for random scheme draws (first example and channel documents)',
        )

    def run(self, **options):
        grid = parse_grid(options['d2_grid'])
        modes = MODES if options['mode'] == 'both' else (options['mode'],)
        config = RunConfig('trace_frontier', 'channel' if options.get('channel') else
                           ('example1' if options.get('example1') else 'example2'),
                           output=options.get('output'),
                           options={'modes': modes, 'grid': grid, 'budget': options['budget'],
                                    'seed': options['seed'], 'search_grid': options.get('grid')})
        logger.info(f"Tracing {config}")

        if config.channel == 'example2':
            frontiers = trace_frontiers_example2(options['ps'], options['t'], grid, options['budget'], modes,
                                                 search_grid(options.get('grid')))
        else:
            if config.channel == 'example1':
                channel, sampler = build_example1(options['ps']), example1_sampler
            else:
                channel = load_channel(read_text(options['channel']))
                sampler = random_scheme_sampler(channel)
            if 2 not in channel.distortion.matrices:
                raise ArgumentError('channel has no distortion table for user 2')
            frontiers = {
                mode: trace_frontier_generic(channel, sampler, grid, options['budget'], options['seed'], mode)
                for mode in modes
            }

        for mode, points in frontiers.items():
            start = frontier_start(points)
            best = max((point.best_sum_rate for point in points), default=0.0)
            if start is None:
                self.stdout.write(self.style.WARNING(f"{mode}: no feasible scheme on the grid"))
            else:
                self.stdout.write(self.style.SUCCESS(
                    f"{mode}: starts at D2 = {start:.12g}, reaches {best:.12g} bits"))
        self.emit(frontier_csv(frontiers), options.get('output'))
