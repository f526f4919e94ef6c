from eventstudy.exceptions import InvalidConfig
from reports.emitters import comparison_lines, emit_comparison, load_report
from reports.management.base import EventStudyCommand
from studies.statistics import compare_studies


class Command(EventStudyCommand):
    help = 'Compare two study reports (e.g. the periods before and after a regulatory change)'

    def add_arguments(self, parser):
        parser.add_argument('--first', help='report.json of the first study')
        parser.add_argument('--second', help='report.json of the second study')
        parser.add_argument('--first-label', default='first', help='Name of the first study')
        parser.add_argument('--second-label', default='second', help='Name of the second study')
        parser.add_argument('--out', help='Directory for comparison.json')

    def run(self, **options):
        missing = [flag for flag in ('first', 'second', 'out') if not options.get(flag)]
        if missing:
            raise InvalidConfig(f"missing required option(s): {', '.join('--' + m for m in missing)}")

        comparison = compare_studies(
            load_report(options['first']),
            load_report(options['second']),
            first_label=options['first_label'],
            second_label=options['second_label'],
        )
        path = emit_comparison(comparison, options['out'])
        for line in comparison_lines(comparison):
            self.stdout.write(f'  {line}')
        self.stdout.write(self.style.SUCCESS(f'Wrote {path}'))
