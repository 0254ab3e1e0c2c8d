from ...estimator import CONDITIONING_VARIANTS
from ...montecarlo import simulate
from ...scheme import assemble_joint
from ..base import MacsenseCommand, RunConfig, logger


class Command(MacsenseCommand):
    help = 'Compare the analytic estimator distortion with a Monte Carlo estimate'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        self.add_channel_arguments(parser)
        self.add_scheme_arguments(parser)
        parser.add_argument('-n', type=int, default=100000, help='Number of i.i.d. draws (default 100000)')
        parser.add_argument('--seed', type=int, default=0, help='Philox seed (default 0)')
        parser.add_argument('--user', type=int, choices=(1, 2), default=2, help='Whose state is estimated')
        parser.add_argument('--variant', choices=CONDITIONING_VARIANTS, default='default',
                            help='Estimator conditioning variant')

    def run(self, **options):
        source, channel = self.resolve_channel(options)
        scheme = self.resolve_scheme(options, source, channel)
        config = RunConfig('simulate', source, scheme.name,
                           options={'n': options['n'], 'seed': options['seed'], 'user': options['user']})
        logger.info(f"Simulating {config}")

        joint = assemble_joint(channel, scheme)
        report = simulate(joint, channel.distortion, options['user'], options['n'], options['seed'],
                          options['variant'])
        self.stdout.write(f"Scheme:     {scheme.name}")
        self.stdout.write(f"Analytic:   {report.analytic:.12g}")
        self.stdout.write(f"Empirical:  {report.empirical.mean:.12g}")
        self.stdout.write(f"Std error:  {report.empirical.standard_error:.6g}")
        self.stdout.write(f"Draws:      {report.empirical.n} (seed {report.seed})")
        if report.within(3.0):
            self.stdout.write(self.style.SUCCESS('Empirical value within 3 standard errors'))
        else:
            self.stdout.write(self.style.WARNING('Empirical value outside 3 standard errors'))
