from reports.config import STUDY_KEYS, resolve_options
from reports.emitters import emit_report, summary_lines
from reports.management.base import EventStudyCommand, add_policy_arguments, add_window_arguments
from reports.models import StudyConfig
from reports.pipeline import run_study
from studies.models import Decision


class Command(EventStudyCommand):
    help = 'Run a market-model event study over price files and write the report'

    def add_arguments(self, parser):
        parser.add_argument('--data-dir', help='Directory holding <security_id>.csv price files')
        parser.add_argument('--events', help='Events CSV (security_id,market_id,announcement_date,label)')
        parser.add_argument('--out', help='Output directory for report.json and the CSV tables')
        parser.add_argument('--config', help='KEY=VALUE file with defaults for any of these options')
        add_window_arguments(parser)
        add_policy_arguments(parser)
        parser.add_argument('--strict-day0', action='store_const', const=True, default=None,
                            help='Fail when an announcement date is not a trading day')
        parser.add_argument('--threads', type=int,
                            help='Worker threads for per-event fitting (default EVENTSTUDY_THREADS)')
        parser.add_argument('--fixed-clock', metavar='TIMESTAMP',
                            help='Write this timestamp instead of the current time into report.json')

    def run(self, **options):
        cfg = StudyConfig.from_options(resolve_options(options, STUDY_KEYS))
        self.stdout.write(f'Running event study on {cfg.events_file}...')

        report = run_study(cfg)
        written = emit_report(report, cfg.output_dir)

        for line in summary_lines(report):
            self.stdout.write(f'  {line}')
        style = self.style.WARNING if report.hypothesis_decision == Decision.REJECT_H0 else self.style.SUCCESS
        self.stdout.write(style(f'Wrote {len(written)} files to {cfg.output_dir}'))
