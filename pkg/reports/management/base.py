from django.core.management.base import BaseCommand, CommandError

from eventstudy.exceptions import EventStudyError


def add_window_arguments(parser):
    group = parser.add_argument_group('windows (trading-day offsets from day 0)')
    group.add_argument('--est-start', type=int, help='First estimation-window day (default -89)')
    group.add_argument('--est-end', type=int, help='Last estimation-window day (default -31)')
    group.add_argument('--evt-start', type=int, help='First event-window day (default -30)')
    group.add_argument('--evt-end', type=int, help='Last event-window day (default 10)')
    group.add_argument('--min-estimation-days', type=int,
                       help='Fewest paired estimation-window returns an event may have (default 30)')


def add_policy_arguments(parser):
    group = parser.add_argument_group('testing and decision')
    group.add_argument('--alpha', type=float, help='Two-sided significance level (default 0.05)')
    group.add_argument('--min-run', type=int,
                       help='Consecutive significant run-up days needed to reject H0 (default 3)')
    group.add_argument('--run-up-start', type=int, help='First day of the run-up window (default -10)')
    group.add_argument('--run-up-end', type=int, help='Last day of the run-up window (default -1)')


def add_simulation_arguments(parser):
    parser.add_argument('--seed', type=int, help='Random seed, 0 <= seed < 2**64 (default 0)')
    parser.add_argument('--market-vol', type=float, help='Daily market return volatility (default 0.01)')
    parser.add_argument('--idio-vol', type=float, help='Daily idiosyncratic volatility (default 0.02)')
    parser.add_argument('--true-alpha', type=float, help='Market-model intercept of every stock (default 0)')
    parser.add_argument('--beta-low', type=float, help='Lower bound of the uniform beta draw (default 0.5)')
    parser.add_argument('--beta-high', type=float, help='Upper bound of the uniform beta draw (default 1.5)')
    parser.add_argument('--leak-onset', type=int, help='First event-day with leakage drift (default -16)')
    parser.add_argument('--leak-jump', type=float, help='Abnormal return added on day 0')
    parser.add_argument('--start-date', help='First calendar date, YYYY-MM-DD (default 2015-01-05)')
    parser.add_argument('--spacing', type=int, help='Trading days between announcements (default 5)')
    parser.add_argument('--market-id', help='Identifier of the market index file (default MKT)')
    add_window_arguments(parser)


class EventStudyCommand(BaseCommand):
    """Turns EventStudyError into CommandError carrying the error's exit code."""

    requires_system_checks = []

    def handle(self, *args, **options):
        try:
            return self.run(**options)
        except EventStudyError as exc:
            raise CommandError(f'{type(exc).__name__}: {exc}', returncode=exc.exit_code) from exc

    def run(self, **options):
        raise NotImplementedError
