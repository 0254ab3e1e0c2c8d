"""
Shared plumbing for the macsense management commands: channel and scheme
selection flags, distortion grids, output files and the exit-code contract
(0 success, 1 verification failure, 2 input error).
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from django.core.management.base import BaseCommand, CommandError

from .. import settings
from ..channel import ChannelSpec, build_example1, build_example2, load_channel
from ..exceptions import ArgumentError, DomainError, MacsenseError
from ..scheme import Example2SchemeParams, SchemeSpec, build_example1_scheme, build_example2_scheme, load_scheme

logger = logging.getLogger(__name__)

INPUT_ERROR = 2
VERIFICATION_FAILURE = 1


@dataclass(frozen=True)
class RunConfig:
    """Everything a subcommand run depends on; two equal configs give identical output"""

    subcommand: str
    channel: str
    scheme: Optional[str] = None
    output: Optional[str] = None
    options: Dict[str, Any] = field(default_factory=dict)


def parse_grid(text: str) -> List[float]:
    """
    'start:stop:step' to an inclusive ascending grid, or a comma list.
    Grid points are start + i * step computed in exact decimal arithmetic.
    """
    try:
        if ':' not in text:
            values = [float(Fraction(part.strip())) for part in text.split(',') if part.strip()]
        else:
            start, stop, step = (Fraction(part.strip()) for part in text.split(':'))
            if step <= 0 or stop < start:
                raise DomainError(f"grid '{text}' needs step > 0 and stop >= start")
            count = int((stop - start) / step) + 1
            values = [float(start + i * step) for i in range(count)]
    except (ValueError, ZeroDivisionError):
        raise ArgumentError(f"cannot parse distortion grid '{text}'; use start:stop:step or a comma list") from None
    if not values:
        raise ArgumentError("distortion grid is empty")
    return values


def read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise CommandError(f"cannot read {path}: {e.strerror}", returncode=INPUT_ERROR)


class MacsenseCommand(BaseCommand):
    """
    Base class for macsense commands. Subclasses implement run(**options);
    macsense errors surface as CommandError with exit code 2.
    """

    def add_arguments(self, parser):
        parser.add_argument(
            '--output', '-o',
            type=str,
            help='Write the CSV result to this path instead of standard output',
        )
        parser.add_argument(
            '--log-level',
            type=str,
            help='Override MACSENSE_LOG_LEVEL for this run',
        )

    def add_channel_arguments(self, parser):
        source = parser.add_mutually_exclusive_group()
        source.add_argument(
            '--example1',
            action='store_true',
            help='Built-in first example (Y = S2 X2, Z1 = S2, Z2 = X1)',
        )
        source.add_argument(
            '--example2',
            action='store_true',
            help='Built-in second example (composite Y, feedback Y\' and Z2)',
        )
        source.add_argument(
            '--channel',
            type=str,
            help='Path to a channel document',
        )
        parser.add_argument('--ps', type=float, default=0.9, help='State parameter p_s (default 0.9)')
        parser.add_argument('--t', type=float, default=0.2, help='Second example noise parameter t (default 0.2)')

    def add_scheme_arguments(self, parser):
        choice = parser.add_mutually_exclusive_group()
        choice.add_argument(
            '--scheme',
            type=str,
            help="'v1-copy' or 'constant' for the first example, otherwise a path to a scheme document",
        )
        choice.add_argument(
            '--corollary-min-d2',
            action='store_true',
            help='Second example: X1 = 0, X2 = 1, V1 erased',
        )
        choice.add_argument(
            '--theorem-min-d2',
            type=float,
            metavar='Q',
            help='Second example: Pr[X1=1] = Q, X2 = 1, V1 never erased',
        )
        choice.add_argument(
            '--params',
            type=str,
            help='Second example: comma list ' + ','.join(Example2SchemeParams.FIELDS),
        )
        parser.add_argument('--p-x1', type=float, default=0.5, help='First example: Pr[X1=1] (default 0.5)')
        parser.add_argument('--p-x2', type=float, default=1.0, help='First example: Pr[X2=1] (default 1)')

    def resolve_channel(self, options) -> Tuple[str, ChannelSpec]:
        if options.get('channel'):
            return options['channel'], load_channel(read_text(options['channel']))
        if options.get('example1'):
            return 'example1', build_example1(options['ps'])
        return 'example2', build_example2(options['ps'], options['t'])

    def resolve_params(self, options) -> Optional[Example2SchemeParams]:
        if options.get('corollary_min_d2'):
            return Example2SchemeParams.corollary_min_d2()
        if options.get('theorem_min_d2') is not None:
            return Example2SchemeParams.theorem_min_d2(options['theorem_min_d2'])
        if options.get('params'):
            try:
                values = [float(part) for part in options['params'].split(',')]
            except ValueError:
                raise ArgumentError(f"cannot parse --params '{options['params']}'") from None
            return Example2SchemeParams.from_vector(values)
        return None

    def resolve_scheme(self, options, source: str, channel: ChannelSpec) -> SchemeSpec:
        params = self.resolve_params(options)
        if params is not None:
            if source == 'example1':
                raise ArgumentError("second-example scheme flags need --example2 or a compatible --channel")
            return build_example2_scheme(params, channel)
        scheme = options.get('scheme')
        if scheme in ('v1-copy', 'constant'):
            if source != 'example1':
                raise ArgumentError(f"--scheme {scheme} applies to --example1 only")
            return build_example1_scheme('copy' if scheme == 'v1-copy' else 'constant',
                                         options['p_x1'], options['p_x2'])
        if scheme:
            return load_scheme(read_text(scheme), channel)
        if source == 'example1':
            return build_example1_scheme('copy', options['p_x1'], options['p_x2'])
        if source == 'example2':
            return build_example2_scheme(Example2SchemeParams.corollary_min_d2(), channel)
        raise ArgumentError("a scheme is required with --channel: pass --scheme PATH")

    def emit(self, text: str, output: Optional[str]):
        if output:
            Path(output).write_text(text)
            self.stdout.write(f"Wrote {output}")
        else:
            self.stdout.write(text, ending='')

    def handle(self, *args, **options):
        if options.get('log_level'):
            settings.configure_logging(options['log_level'])
        try:
            return self.run(**options)
        except MacsenseError as e:
            logger.error(f"{type(e).__name__}: {e}")
            raise CommandError(str(e), returncode=INPUT_ERROR)

    def run(self, **options):
        raise NotImplementedError('subclasses of MacsenseCommand must provide a run() method')
