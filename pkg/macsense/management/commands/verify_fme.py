from fractions import Fraction

import numpy as np
from django.core.management.base import CommandError

from ...channel import build_example2, load_channel, random_channel
from ...fme import verify_instance
from ...parallel import ordered_map
from ...region import compute_info_terms, theorem_region
from ...scheme import assemble_joint, random_scheme
from ..base import VERIFICATION_FAILURE, MacsenseCommand, RunConfig, logger, read_text


class Command(MacsenseCommand):
    help = ('Project the auxiliary-rate system onto (R1, R2) by exact elimination and compare it '
            'with the closed-form region for random schemes. Exits 1 if any instance differs')

    def add_arguments(self, parser):
        super().add_arguments(parser)
        source = parser.add_mutually_exclusive_group()
        source.add_argument('--example2', action='store_true', help='Sample schemes on the second example (default)')
        source.add_argument('--random-channel', action='store_true', help='Draw a fresh 2x2x2 channel per instance')
        source.add_argument('--channel', type=str, help='Path to a channel document')
        parser.add_argument('--ps', type=float, default=0.9, help='Second example p_s (default 0.9)')
        parser.add_argument('--t', type=float, default=0.2, help='Second example t (default 0.2)')
        parser.add_argument('--count', type=int, default=20, help='Number of random schemes (default 20)')
        parser.add_argument('--seed', type=int, required=True, help='Seed for scheme and channel draws')
        parser.add_argument('--aux-size', type=int, default=2, help='Alphabet size of U0, U1, U2, V1, V2')
        parser.add_argument('--samples', type=int, default=1000, help='Random points per comparison')
        parser.add_argument('--grid', type=int, default=100, help='Grid points per axis per comparison')
        parser.add_argument(
            '--perturb',
            type=str,
            help=('Tighten one projected row by this amount (negative control: every instance '
                  'with a nonempty region then fails)'),
        )

    def run(self, **options):
        if options['count'] < 1:
            raise CommandError('--count must be at least 1', returncode=2)
        if options['aux_size'] < 1:
            raise CommandError('--aux-size must be at least 1', returncode=2)
        try:
            perturb = Fraction(options['perturb']) if options.get('perturb') else None
        except ValueError:
            raise CommandError(f"cannot parse --perturb '{options['perturb']}'", returncode=2)

        config = RunConfig('verify_fme', options.get('channel') or
                           ('random' if options['random_channel'] else 'example2'),
                           options={'count': options['count'], 'seed': options['seed'],
                                    'aux_size': options['aux_size'], 'perturb': perturb})
        logger.info(f"Verifying {config}")

        fixed = None
        if options.get('channel'):
            fixed = load_channel(read_text(options['channel']))
        elif not options['random_channel']:
            fixed = build_example2(options['ps'], options['t'])

        rng = np.random.Generator(np.random.Philox(options['seed']))
        sizes = {aux: options['aux_size'] for aux in ('U0', 'U1', 'U2', 'V1', 'V2')}
        instances = []
        for i in range(options['count']):
            channel = fixed if fixed is not None else random_channel(rng)
            instances.append((f"instance {i + 1}", channel, random_scheme(channel, rng, sizes)))

        def check(instance):
            label, channel, scheme = instance
            info = compute_info_terms(assemble_joint(channel, scheme))
            return verify_instance(info, theorem_region(info), label, samples=options['samples'],
                                   seed=options['seed'], grid=options['grid'], perturb=perturb)

        results = ordered_map(check, instances)
        failures = 0
        for result in results:
            if result.verdict:
                self.stdout.write(f"{result.label:<14} PASS  {result.verdict.describe()}")
            else:
                failures += 1
                self.stdout.write(self.style.ERROR(f"{result.label:<14} FAIL  {result.verdict.describe()}"))

        passed = len(results) - failures
        self.stdout.write('')
        self.stdout.write(f"{passed}/{len(results)} equivalent")
        if failures:
            raise CommandError(f"{failures} of {len(results)} instances differ", returncode=VERIFICATION_FAILURE)
