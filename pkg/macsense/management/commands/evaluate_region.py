from django.core.management.base import CommandError

from ...estimator import CONDITIONING_VARIANTS, distortion_report, optimal_estimator
from ...region import compute_info_terms, corollary_region, theorem_region, transcribed_region
from ...scheme import assemble_joint, constant_V_scheme
from ..base import MacsenseCommand, RunConfig, logger


class Command(MacsenseCommand):
    help = ('Evaluate the rate region and distortions of one scheme. CSV columns: '
            'a1,a2,rhs_bits,strict,label (one row per inequality)')

    def add_arguments(self, parser):
        super().add_arguments(parser)
        self.add_channel_arguments(parser)
        self.add_scheme_arguments(parser)
        parser.add_argument(
            '--region',
            choices=('theorem', 'corollary', 'transcribed'),
            default='theorem',
            help='Region to evaluate (corollary makes V1 and V2 constant first)',
        )
        parser.add_argument(
            '--vertices',
            action='store_true',
            help='Write the rate polygon corners (R1,R2) instead of the inequalities',
        )
        parser.add_argument(
            '--estimator-csv',
            type=str,
            help='Also write the Tx 2 estimator table to this path',
        )

    def run(self, **options):
        source, channel = self.resolve_channel(options)
        scheme = self.resolve_scheme(options, source, channel)
        if options['region'] == 'corollary':
            scheme = constant_V_scheme(scheme)
        config = RunConfig('evaluate_region', source, scheme.name, options.get('output'),
                           {'region': options['region'], 'ps': options['ps'], 't': options['t']})
        logger.info(f"Evaluating {config}")

        joint = assemble_joint(channel, scheme)
        info = compute_info_terms(joint)
        if options['region'] == 'corollary':
            region = corollary_region(joint)
        elif options['region'] == 'transcribed':
            region = transcribed_region(joint)
        else:
            region = theorem_region(info)
        distortions = distortion_report(joint, channel.distortion)

        self.stdout.write(self.style.SUCCESS(f"{options['region'].capitalize()} region of '{scheme.name}' "
                                             f"on '{channel.name}'"))
        self.stdout.write('')
        self.stdout.write(f"{'Term':<6} {'Bits':>16}")
        self.stdout.write('-' * 23)
        for label, value in info.as_dict().items():
            self.stdout.write(f"{label:<6} {value:>16.12f}")

        self.stdout.write('')
        self.stdout.write('Inequalities:')
        for inequality in region.inequalities:
            self.stdout.write(f"  {inequality.describe():<40} {inequality.label}")

        if region.feasibility:
            self.stdout.write('')
            self.stdout.write('Feasibility slacks:')
            for condition in region.feasibility:
                status = 'ok' if condition.holds() else 'VIOLATED'
                self.stdout.write(f"  {condition.label:<16} {condition.slack:>16.12g}  {status}")

        self.stdout.write('')
        self.stdout.write(f"{'User':<6} " + ' '.join(f"{variant:>16}" for variant in CONDITIONING_VARIANTS))
        for k in sorted({k for k, _ in distortions}):
            row = ' '.join(f"{distortions[(k, variant)]:>16.12g}" for variant in CONDITIONING_VARIANTS)
            self.stdout.write(f"D{k:<5} {row}")

        self.stdout.write('')
        best = region.max_sum_rate()
        if best is None:
            self.stdout.write(self.style.WARNING('Region is empty: a feasibility condition fails'))
        else:
            self.stdout.write(f"Max sum-rate: {best:.12g}")

        text = region.vertices_csv() if options['vertices'] else region.to_csv()
        if options.get('output'):
            self.emit(text, options['output'])
        if options.get('estimator_csv'):
            if 2 not in channel.distortion.matrices:
                raise CommandError('channel has no distortion table for user 2', returncode=2)
            estimator = optimal_estimator(joint, 2, channel.distortion)
            self.emit(estimator.to_csv(), options['estimator_csv'])
