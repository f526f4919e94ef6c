import json
import tempfile
from contextlib import redirect_stderr, redirect_stdout
from io import StringIO
from pathlib import Path

import numpy as np
import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from eventstudy.exceptions import InvalidConfig, IoError, MalformedRow, MissingFile
from studies.models import Decision, DayStat

from . import cli
from .config import STUDY_KEYS, read_config_file, resolve_options
from .emitters import DAY_STATS_COLUMNS, emit_report, load_report, summary_lines
from .models import Report, StudyConfig
from .pipeline import run_study

FIXTURE = Path(__file__).resolve().parent / 'fixtures' / 'two_events'
CLOCK = '2024-01-01T00:00:00+00:00'


def run_command(name, **options):
    out = StringIO()
    call_command(name, stdout=out, stderr=StringIO(), **options)
    return out.getvalue()


def fixture_study(out, **options):
    return run_command('study', data_dir=str(FIXTURE), events=str(FIXTURE / 'events.csv'),
                       out=str(out), fixed_clock=CLOCK, **options)


class TempDirMixin:
    def setUp(self):
        super().setUp()
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)
        self.addCleanup(self._tmp.cleanup)


class StudyCommandTests(TempDirMixin, SimpleTestCase):
    def test_repeated_runs_are_byte_identical(self):
        fixture_study(self.tmp / 'a')
        fixture_study(self.tmp / 'b')
        for name in ('report.json', 'day_stats.csv', 'aar.csv', 'caar.csv', 'fits.csv'):
            self.assertEqual((self.tmp / 'a' / name).read_bytes(), (self.tmp / 'b' / name).read_bytes(), name)

    def test_report_contents(self):
        output = fixture_study(self.tmp)
        data = json.loads((self.tmp / 'report.json').read_text())
        self.assertEqual(data['generated_at'], CLOCK)
        self.assertEqual(data['events'], ['AAA bid', 'BBB:2020-05-30'])
        self.assertEqual(data['excluded'], [])
        self.assertEqual([f['event'] for f in data['fits']], ['AAA bid', 'BBB:2020-05-30'])
        self.assertEqual(data['gaps'], {'BBB:2020-05-30': [-5, -4]})
        self.assertEqual([row['event_day'] for row in data['day_stats']], list(range(-30, 11)))
        self.assertEqual(data['config']['windows']['est_start'], -89)
        self.assertEqual(data['config']['alpha_level'], 0.05)
        self.assertIn(data['hypothesis_decision'], ('accept_H0', 'reject_H0'))
        for key in ('version', 'significant_days', 'reaction_fraction', 'run_up'):
            self.assertIn(key, data)
        self.assertIn('Events: 2 used, 0 excluded', output)

        by_day = {row['event_day']: row for row in data['day_stats']}
        self.assertEqual(by_day[-5]['n'], 1)
        self.assertIsNone(by_day[-5]['t_stat'])
        self.assertEqual(by_day[0]['n'], 2)

    def test_csv_tables(self):
        fixture_study(self.tmp)
        report = load_report(self.tmp / 'report.json')
        lines = (self.tmp / 'day_stats.csv').read_text().splitlines()
        self.assertEqual(lines[0], ','.join(DAY_STATS_COLUMNS))
        self.assertEqual(len(lines), 42)

        caar_lines = (self.tmp / 'caar.csv').read_text().splitlines()
        self.assertEqual(caar_lines[0], 'event_day,value')
        day, value = caar_lines[-1].split(',')
        self.assertEqual(int(day), 10)
        self.assertEqual(float(value), report.caar_at(10))
        self.assertEqual(len((self.tmp / 'fits.csv').read_text().splitlines()), 3)

    def test_load_report_round_trip(self):
        fixture_study(self.tmp / 'a')
        report = load_report(self.tmp / 'a' / 'report.json')
        emit_report(report, self.tmp / 'b')
        for name in ('report.json', 'day_stats.csv', 'caar.csv'):
            self.assertEqual((self.tmp / 'a' / name).read_bytes(), (self.tmp / 'b' / name).read_bytes(), name)

    def test_strict_day0_excludes_weekend_announcement(self):
        with self.assertRaises(CommandError) as ctx:
            fixture_study(self.tmp, strict_day0=True)
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn('NoUsableEvents', str(ctx.exception))

    def test_alpha_one_flags_every_defined_day(self):
        fixture_study(self.tmp, alpha=1.0)
        data = json.loads((self.tmp / 'report.json').read_text())
        self.assertEqual(data['significant_days'], [d for d in range(-30, 11) if d not in (-5, -4)])

    def test_missing_options(self):
        with self.assertRaises(CommandError) as ctx:
            run_command('study', data_dir=str(FIXTURE))
        self.assertEqual(ctx.exception.returncode, 1)


EXPECTED = FIXTURE / 'expected'
OUTPUT_FILES = ('report.json', 'day_stats.csv', 'aar.csv', 'caar.csv', 'fits.csv')


def oracle_fixture_study(last_day):
    """Fits and CAAR(last_day) of the fixture recomputed with pandas and np.polyfit."""
    prices = {
        name: pd.read_csv(FIXTURE / f'{name}.csv', index_col='date', parse_dates=['date'])['adj_close']
        for name in ('MKT', 'AAA', 'BBB')
    }
    calendar = prices['MKT'].index
    fits, cars = {}, []
    for security_id, announced, key in (('AAA', '2020-05-20', 'AAA bid'), ('BBB', '2020-05-30', 'BBB:2020-05-30')):
        day0 = calendar.searchsorted(pd.Timestamp(announced))
        frame = pd.DataFrame({
            'stock': prices[security_id].reindex(calendar).pct_change(fill_method=None),
            'market': prices['MKT'].pct_change(),
            'day': np.arange(len(calendar)) - day0,
        })
        estimation = frame[frame['day'].between(-89, -31)].dropna()
        beta, alpha = np.polyfit(estimation['market'], estimation['stock'], 1)
        fits[key] = (alpha, beta)
        window = frame[frame['day'].between(-30, last_day)]
        cars.append(float((window['stock'] - alpha - beta * window['market']).fillna(0.0).sum()))
    return fits, float(np.mean(cars))


class GoldenOutputTests(TempDirMixin, SimpleTestCase):
    def test_matches_checked_in_output(self):
        fixture_study(self.tmp)
        missing = [name for name in OUTPUT_FILES if not (EXPECTED / name).is_file()]
        if missing:
            EXPECTED.mkdir(exist_ok=True)
            for name in missing:
                (EXPECTED / name).write_bytes((self.tmp / name).read_bytes())
            self.skipTest(f"wrote {', '.join(missing)} to {EXPECTED}; commit them")
        for name in OUTPUT_FILES:
            self.assertEqual((self.tmp / name).read_bytes(), (EXPECTED / name).read_bytes(), name)

    def test_numbers_match_independent_recomputation(self):
        fixture_study(self.tmp)
        report = load_report(self.tmp / 'report.json')
        fits, caar_day0 = oracle_fixture_study(0)
        for fit in report.fits:
            alpha, beta = fits[fit.event_key]
            self.assertAlmostEqual(fit.alpha, alpha, delta=1e-12)
            self.assertAlmostEqual(fit.beta, beta, delta=1e-10)
        self.assertAlmostEqual(report.caar_at(0), caar_day0, delta=1e-12)
        self.assertAlmostEqual(report.caar_at(10), oracle_fixture_study(10)[1], delta=1e-12)


class ConfigFileTests(TempDirMixin, SimpleTestCase):
    def write(self, text):
        path = self.tmp / 'study.env'
        path.write_text(text)
        return path

    def test_typed_values(self):
        path = self.write('alpha=0.01\nmin_run=2\nstrict_day0=true\ndata_dir=prices\n')
        self.assertEqual(read_config_file(path, STUDY_KEYS),
                         {'alpha': 0.01, 'min_run': 2, 'strict_day0': True, 'data_dir': 'prices'})

    def test_unknown_key(self):
        with self.assertRaises(InvalidConfig):
            read_config_file(self.write('alfa=0.01\n'), STUDY_KEYS)

    def test_bad_value(self):
        with self.assertRaises(InvalidConfig):
            read_config_file(self.write('min_run=three\n'), STUDY_KEYS)

    def test_missing_file(self):
        with self.assertRaises(InvalidConfig):
            read_config_file(self.tmp / 'nope.env', STUDY_KEYS)

    def test_flag_beats_file(self):
        path = self.write('alpha=0.01\nmin_run=2\n')
        resolved = resolve_options({'config': str(path), 'alpha': 0.1, 'min_run': None}, STUDY_KEYS)
        self.assertEqual((resolved['alpha'], resolved['min_run']), (0.1, 2))
        self.assertIsNone(resolved['run_up_start'])

    def test_config_file_drives_the_study(self):
        path = self.write(f'data_dir={FIXTURE}\nevents={FIXTURE / "events.csv"}\nalpha=1.0\n')
        run_command('study', config=str(path), out=str(self.tmp / 'out'), fixed_clock=CLOCK)
        data = json.loads((self.tmp / 'out' / 'report.json').read_text())
        self.assertEqual(data['config']['alpha_level'], 1.0)
        self.assertEqual(len(data['significant_days']), 39)

        run_command('study', config=str(path), out=str(self.tmp / 'flag'), fixed_clock=CLOCK, alpha=0.05)
        data = json.loads((self.tmp / 'flag' / 'report.json').read_text())
        self.assertEqual(data['config']['alpha_level'], 0.05)


class StudyConfigTests(TempDirMixin, SimpleTestCase):
    def test_required_options(self):
        with self.assertRaises(InvalidConfig) as ctx:
            StudyConfig.from_options({'data_dir': 'x'})
        self.assertIn('--events', str(ctx.exception))
        self.assertIn('--out', str(ctx.exception))

    def test_alpha_range(self):
        for alpha in (0.0, 1.5):
            with self.assertRaises(InvalidConfig):
                StudyConfig('d', 'e', 'o', alpha_level=alpha)

    def test_validate_paths(self):
        cfg = StudyConfig(self.tmp / 'missing', FIXTURE / 'events.csv', self.tmp / 'out')
        with self.assertRaises(InvalidConfig):
            cfg.validate()
        StudyConfig(FIXTURE, FIXTURE / 'events.csv', self.tmp / 'out').validate()

    def test_settings_defaults(self):
        cfg = StudyConfig.from_options({'data_dir': 'd', 'events': 'e', 'out': 'o'})
        self.assertEqual(cfg.alpha_level, 0.05)
        self.assertEqual(cfg.policy.min_run, 3)
        self.assertEqual((cfg.windows.est_start, cfg.windows.evt_end), (-89, 10))
        self.assertFalse(cfg.strict_day0)


class ReportTests(TempDirMixin, SimpleTestCase):
    def setUp(self):
        super().setUp()
        self.report = run_study(StudyConfig(FIXTURE, FIXTURE / 'events.csv', self.tmp, fixed_clock=CLOCK))

    def test_from_dict_round_trip(self):
        self.assertEqual(Report.from_dict(self.report.to_dict()), self.report)

    def test_window_and_caar(self):
        self.assertEqual(self.report.event_window, (-30, 10))
        self.assertEqual(self.report.caar_at(10), self.report.day_stats[-1].caar)
        with self.assertRaises(KeyError):
            self.report.caar_at(11)

    def test_rejects_gapped_day_stats(self):
        row = self.report.day_stats[0]
        with self.assertRaises(ValueError):
            Report.from_dict({**self.report.to_dict(), 'day_stats': [
                row.as_dict(), DayStat(**{**row.as_dict(), 'event_day': row.event_day + 2}).as_dict(),
            ]})

    def test_summary_lines(self):
        lines = summary_lines(self.report)
        self.assertEqual(lines[0], 'Events: 2 used, 0 excluded')
        self.assertTrue(lines[-1].startswith('Decision: '))

    def test_unwritable_output(self):
        blocker = self.tmp / 'file'
        blocker.write_text('')
        with self.assertRaises(IoError):
            emit_report(self.report, blocker)

    def test_load_report_errors(self):
        with self.assertRaises(MissingFile):
            load_report(self.tmp / 'absent.json')
        bad = self.tmp / 'bad.json'
        bad.write_text('{"day_stats": []}')
        with self.assertRaises(MalformedRow):
            load_report(bad)


class SimulateStudyTests(TempDirMixin, SimpleTestCase):
    def test_leakage_is_detected_end_to_end(self):
        data = self.tmp / 'data'
        run_command('simulate', out=str(data), events=40, seed=5, idio_vol=0.01, leak_drift=0.02)
        self.assertTrue((data / 'truth.json').is_file())
        self.assertTrue((data / 'S040.csv').is_file())

        output = run_command('study', data_dir=str(data), events=str(data / 'events.csv'),
                             out=str(self.tmp / 'report'), fixed_clock=CLOCK)
        data = json.loads((self.tmp / 'report' / 'report.json').read_text())
        self.assertEqual(data['hypothesis_decision'], Decision.REJECT_H0.value)
        self.assertTrue(set(range(-10, 0)) <= set(data['significant_days']))
        self.assertIn('Decision: reject_H0', output)

    def test_clean_panel_is_accepted(self):
        data = self.tmp / 'data'
        run_command('simulate', out=str(data), events=40, seed=6)
        run_command('study', data_dir=str(data), events=str(data / 'events.csv'),
                    out=str(self.tmp / 'report'), fixed_clock=CLOCK)
        report = load_report(self.tmp / 'report' / 'report.json')
        self.assertEqual(report.hypothesis_decision, Decision.ACCEPT_H0)
        self.assertEqual(len(report.events), 40)

    def test_invalid_simulation(self):
        with self.assertRaises(CommandError) as ctx:
            run_command('simulate', out=str(self.tmp), events=1)
        self.assertEqual(ctx.exception.returncode, 1)


class CompareAndPowerCommandTests(TempDirMixin, SimpleTestCase):
    def test_compare(self):
        fixture_study(self.tmp / 'strict', alpha=0.01)
        fixture_study(self.tmp / 'loose', alpha=0.2)
        output = run_command('compare', first=str(self.tmp / 'strict' / 'report.json'),
                             second=str(self.tmp / 'loose' / 'report.json'),
                             first_label='strict', second_label='loose', out=str(self.tmp / 'cmp'))
        data = json.loads((self.tmp / 'cmp' / 'comparison.json').read_text())
        self.assertEqual((data['first']['label'], data['second']['label']), ('strict', 'loose'))
        # same panel, so only the significance counts can move
        self.assertEqual(data['deltas']['caar_day0'], 0.0)
        self.assertGreaterEqual(data['deltas']['significant_pre_days'], 0)
        self.assertIn('strict:', output)

    def test_compare_missing_report(self):
        with self.assertRaises(CommandError) as ctx:
            run_command('compare', first=str(self.tmp / 'x.json'), second=str(self.tmp / 'y.json'),
                        out=str(self.tmp))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_power(self):
        run_command('power', out=str(self.tmp), drifts='0,0.02', sizes='10', replications=4, seed=1,
                    idio_vol=0.01)
        lines = (self.tmp / 'power.csv').read_text().splitlines()
        self.assertEqual(lines[0], 'daily_drift,n_events,replications,rejections,rejection_rate')
        self.assertEqual(len(lines), 3)
        data = json.loads((self.tmp / 'power.json').read_text())
        self.assertEqual([c['daily_drift'] for c in data['cells']], [0.0, 0.02])
        self.assertEqual(data['cells'][1]['rejection_rate'], 1.0)
        self.assertEqual(len(data['cells'][0]['day_frequency']), 41)
        self.assertEqual(data['config']['replications'], 4)

    def test_power_bad_grid(self):
        with self.assertRaises(CommandError) as ctx:
            run_command('power', out=str(self.tmp), sizes='ten')
        self.assertEqual(ctx.exception.returncode, 1)


class CliTests(TempDirMixin, SimpleTestCase):
    def main(self, *argv):
        with redirect_stdout(StringIO()), redirect_stderr(StringIO()):
            return cli.main(list(argv))

    def test_usage(self):
        self.assertEqual(self.main(), 1)
        self.assertEqual(self.main('--help'), 0)
        self.assertEqual(self.main('frobnicate'), 1)
        self.assertEqual(self.main('study', '--help'), 0)

    def test_unknown_flag(self):
        self.assertEqual(self.main('study', '--no-such-flag'), 1)

    def test_missing_data_dir(self):
        self.assertEqual(self.main('study', '--data-dir', str(self.tmp / 'absent'),
                                   '--events', str(FIXTURE / 'events.csv'), '--out', str(self.tmp)), 1)

    def test_data_error(self):
        events = self.tmp / 'events.csv'
        events.write_text('security_id,market_id,announcement_date,label\nZZZ,MKT,2020-05-20,\n')
        self.assertEqual(self.main('study', '--data-dir', str(FIXTURE), '--events', str(events),
                                   '--out', str(self.tmp / 'out')), 2)

    def test_success(self):
        self.assertEqual(self.main('study', '--data-dir', str(FIXTURE), '--events', str(FIXTURE / 'events.csv'),
                                   '--out', str(self.tmp / 'out'), '--fixed-clock', CLOCK), 0)
        self.assertTrue((self.tmp / 'out' / 'report.json').is_file())
