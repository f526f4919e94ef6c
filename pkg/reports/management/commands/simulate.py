from eventstudy.exceptions import InvalidConfig
from reports.config import SIMULATE_KEYS, resolve_options
from reports.management.base import EventStudyCommand, add_simulation_arguments
from simulations.generator import simulate_panel, write_panel
from simulations.models import SimConfig


class Command(EventStudyCommand):
    help = 'Generate a synthetic price panel with optional pre-announcement leakage'

    def add_arguments(self, parser):
        parser.add_argument('--events', type=int, help='Number of announcements (default 40)')
        parser.add_argument('--leak-drift', type=float, help='Abnormal return added on each leakage day')
        parser.add_argument('--out', help='Directory for the price files, events.csv and truth.json')
        parser.add_argument('--config', help='KEY=VALUE file with defaults for any of these options')
        add_simulation_arguments(parser)

    def run(self, **options):
        resolved = resolve_options(options, SIMULATE_KEYS)
        if not resolved['out']:
            raise InvalidConfig('missing required option: --out')
        cfg = SimConfig.from_options(resolved)

        panel = simulate_panel(cfg)
        written = write_panel(panel, resolved['out'])
        leakage = cfg.leakage.as_dict() if cfg.leakage else 'none'
        self.stdout.write(f'  {cfg.n_events} events, seed {cfg.seed}, leakage {leakage}')
        self.stdout.write(self.style.SUCCESS(f"Wrote {len(written)} files to {resolved['out']}"))
