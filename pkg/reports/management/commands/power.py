from decouple import Csv
from django.conf import settings

from eventstudy.exceptions import InvalidConfig
from reports.config import POWER_KEYS, resolve_options
from reports.emitters import emit_power
from reports.management.base import EventStudyCommand, add_policy_arguments, add_simulation_arguments
from simulations.models import SimConfig
from simulations.power import power_study
from studies.models import DecisionPolicy


def _parse_list(raw, cast, flag):
    try:
        values = Csv(cast=cast)(raw)
    except ValueError as exc:
        raise InvalidConfig(f'{flag}: {exc}') from exc
    if not values:
        raise InvalidConfig(f'{flag} is empty')
    return values


class Command(EventStudyCommand):
    help = 'Rejection rate of the hypothesis decision over a (drift, n_events) grid'

    def add_arguments(self, parser):
        parser.add_argument('--drifts', help='Comma-separated daily leakage drifts (default 0)')
        parser.add_argument('--sizes', help='Comma-separated event counts (default 18,40)')
        parser.add_argument('--replications', type=int, help='Simulated studies per cell (default 200)')
        parser.add_argument('--threads', type=int, help='Worker threads (default EVENTSTUDY_THREADS)')
        parser.add_argument('--out', help='Directory for power.json and power.csv')
        parser.add_argument('--config', help='KEY=VALUE file with defaults for any of these options')
        add_simulation_arguments(parser)
        add_policy_arguments(parser)

    def run(self, **options):
        resolved = resolve_options(options, POWER_KEYS)
        if not resolved['out']:
            raise InvalidConfig('missing required option: --out')
        drifts = _parse_list(resolved['drifts'] or '0', float, '--drifts')
        sizes = _parse_list(resolved['sizes'] or '18,40', int, '--sizes')
        replications = resolved['replications'] or 200
        base = SimConfig.from_options(resolved)
        policy = DecisionPolicy.from_settings(
            min_run=resolved['min_run'],
            run_up_start=resolved['run_up_start'],
            run_up_end=resolved['run_up_end'],
        )
        alpha_level = resolved['alpha'] if resolved['alpha'] is not None else settings.EVENTSTUDY_ALPHA

        grid = [(drift, n) for drift in drifts for n in sizes]
        self.stdout.write(f'Simulating {len(grid)} cells x {replications} replications...')
        cells = power_study(grid, replications, base, alpha_level=alpha_level, policy=policy,
                            threads=resolved['threads'])

        for cell in cells:
            self.stdout.write(f'  drift={cell.daily_drift:g} n={cell.n_events}: '
                              f'rejection rate {cell.rejection_rate:.3f}')
        config = {
            'simulation': base.as_dict(),
            'alpha_level': alpha_level,
            'decision_policy': policy.as_dict(),
            'replications': replications,
        }
        written = emit_power(cells, resolved['out'], config)
        self.stdout.write(self.style.SUCCESS(f"Wrote {len(written)} files to {resolved['out']}"))
