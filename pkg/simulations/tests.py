import json
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from eventstudy.exceptions import InvalidConfig
from ingest.models import WindowConfig
from ingest.alignment import align_events
from ingest.parsers import load_event_file
from market_model.estimation import build_panel
from studies.models import DecisionPolicy
from studies.statistics import analyze, caar

from .generator import draw_returns, simulate_events, simulate_panel, trading_calendar, write_panel
from .models import LeakageProfile, PowerCell, SimConfig
from .power import cell_config, power_study, run_replication


def study_files(data_dir, cfg):
    aligned, exclusions = align_events(load_event_file(Path(data_dir) / 'events.csv'), data_dir, cfg.windows)
    return build_panel(aligned, cfg.windows, exclusions=exclusions, threads=1)


class SimConfigTests(SimpleTestCase):
    def test_defaults(self):
        cfg = SimConfig()
        self.assertEqual(cfg.n_events, 40)
        self.assertEqual(cfg.day0_position(0), 90)
        self.assertEqual(cfg.calendar_length, 90 + 39 * 5 + 11)
        self.assertEqual((cfg.security_id(0), cfg.label(11)), ('S001', 'sim-012'))

    def test_invalid_values_are_collected(self):
        with self.assertRaises(InvalidConfig) as ctx:
            SimConfig(n_events=1, idio_vol=0.0)
        self.assertIn('n_events', str(ctx.exception))
        self.assertIn('idio_vol', str(ctx.exception))

    def test_invalid_values(self):
        for kwargs in ({'seed': -1}, {'seed': 2 ** 64}, {'market_daily_vol': float('nan')},
                       {'true_beta_range': (1.5, 0.5)}, {'true_beta_range': (0.5, 5.0)},
                       {'event_spacing': 0}, {'leakage': LeakageProfile(onset_day=-40)}):
            with self.subTest(**{k: str(v) for k, v in kwargs.items()}):
                with self.assertRaises(InvalidConfig):
                    SimConfig(**kwargs)

    def test_leakage_profile(self):
        with self.assertRaises(InvalidConfig):
            LeakageProfile(onset_day=0)
        profile = LeakageProfile(onset_day=-3, daily_drift=0.01, announcement_jump=0.05)
        self.assertEqual(profile.injected(), {-3: 0.01, -2: 0.01, -1: 0.01, 0: 0.05})
        self.assertEqual(LeakageProfile(daily_drift=0.0).injected(), {})

    def test_from_options(self):
        cfg = SimConfig.from_options({
            'events': 12, 'seed': 9, 'idio_vol': 0.03, 'beta_low': 0.9, 'leak_drift': 0.002,
            'start_date': '2018-03-01', 'evt_end': 5,
        })
        self.assertEqual((cfg.n_events, cfg.seed, cfg.idio_vol), (12, 9, 0.03))
        self.assertEqual(cfg.true_beta_range, (0.9, 1.5))
        self.assertEqual(cfg.leakage, LeakageProfile(daily_drift=0.002))
        self.assertEqual(cfg.windows.evt_end, 5)
        self.assertEqual(SimConfig.from_options({}).leakage, None)
        with self.assertRaises(InvalidConfig):
            SimConfig.from_options({'start_date': '01/03/2018'})


class GeneratorTests(SimpleTestCase):
    def test_calendar_is_business_days(self):
        calendar = trading_calendar(SimConfig(n_events=3))
        self.assertEqual(len(calendar), SimConfig(n_events=3).calendar_length)
        self.assertTrue(all(day.weekday() < 5 for day in calendar))
        self.assertEqual(calendar[0].isoformat(), '2015-01-05')

    def test_same_seed_writes_identical_files(self):
        cfg = SimConfig(n_events=6, seed=42, leakage=LeakageProfile())
        with tempfile.TemporaryDirectory() as first, tempfile.TemporaryDirectory() as second:
            a = write_panel(simulate_panel(cfg), first)
            b = write_panel(simulate_panel(cfg), second)
            self.assertEqual([p.name for p in a], [p.name for p in b])
            self.assertEqual(len(a), 6 + 3)
            for left, right in zip(a, b):
                self.assertEqual(left.read_bytes(), right.read_bytes())

    def test_different_seed_changes_prices(self):
        first, _ = draw_returns(SimConfig(n_events=2, seed=1))
        second, _ = draw_returns(SimConfig(n_events=2, seed=2))
        self.assertFalse(np.array_equal(first, second))

    def test_events_do_not_share_streams(self):
        _, stocks = draw_returns(SimConfig(n_events=3, seed=5))
        _, more = draw_returns(SimConfig(n_events=4, seed=5))
        # adding an event leaves the earlier ones untouched
        for a, b in zip(stocks, more):
            self.assertEqual(a['beta'], b['beta'])
            np.testing.assert_array_equal(a['returns'][1:len(a['returns'])], b['returns'][1:len(a['returns'])])

    def test_truth_file(self):
        cfg = SimConfig(n_events=3, seed=3, leakage=LeakageProfile(onset_day=-2, daily_drift=0.01))
        with tempfile.TemporaryDirectory() as out:
            write_panel(simulate_panel(cfg), out)
            truth = json.loads((Path(out) / 'truth.json').read_text())
            events = load_event_file(Path(out) / 'events.csv')
        self.assertEqual(truth['seed'], 3)
        self.assertEqual([e['label'] for e in truth['events']], ['sim-001', 'sim-002', 'sim-003'])
        self.assertEqual(truth['events'][0]['injected_abnormal_returns'], {'-2': 0.01, '-1': 0.01})
        self.assertEqual([e.announcement_date.isoformat() for e in events],
                         [e['announcement_date'] for e in truth['events']])
        for entry in truth['events']:
            self.assertGreaterEqual(entry['beta'], 0.5)
            self.assertLessEqual(entry['beta'], 1.5)

    def test_written_panel_reads_back(self):
        cfg = SimConfig(n_events=5, seed=8)
        with tempfile.TemporaryDirectory() as out:
            write_panel(simulate_panel(cfg), out)
            fits, panel = study_files(out, cfg)
        direct_fits, direct_panel = build_panel(simulate_events(cfg), cfg.windows, threads=1)
        self.assertEqual(list(fits), list(direct_fits))
        self.assertEqual(panel.excluded, ())
        for key, fit in fits.items():
            self.assertAlmostEqual(fit.beta, direct_fits[key].beta, delta=1e-9)
            for day, value in panel.per_event[key].items():
                self.assertAlmostEqual(value, direct_panel.per_event[key][day], delta=1e-12)


class GroundTruthTests(SimpleTestCase):
    def test_near_noiseless_fit_recovers_parameters(self):
        cfg = SimConfig(n_events=40, seed=17, idio_vol=1e-6, true_alpha=0.0004)
        with tempfile.TemporaryDirectory() as out:
            simulated = simulate_panel(cfg)
            write_panel(simulated, out)
            fits, panel = study_files(out, cfg)
        for entry in simulated.truth['events']:
            fit = fits[entry['label']]
            self.assertAlmostEqual(fit.alpha, entry['alpha'], delta=1e-4)
            self.assertAlmostEqual(fit.beta, entry['beta'], delta=1e-4)
        for stat in analyze(panel, alpha_level=0.05, policy=DecisionPolicy()).stats:
            self.assertLess(abs(stat.aar), 1e-6)

    def test_abnormal_returns_equal_injected_leakage(self):
        leakage = LeakageProfile(onset_day=-5, daily_drift=0.003, announcement_jump=0.02)
        cfg = SimConfig(n_events=4, seed=23, idio_vol=1e-12, leakage=leakage)
        with tempfile.TemporaryDirectory() as out:
            write_panel(simulate_panel(cfg), out)
            _, panel = study_files(out, cfg)
        injected = leakage.injected()
        for values in panel.per_event.values():
            for day, value in values.items():
                self.assertAlmostEqual(value, injected.get(day, 0.0), delta=1e-8)

    def test_leakage_leaves_estimation_untouched(self):
        clean = SimConfig(n_events=10, seed=31)
        leaky = replace(clean, leakage=LeakageProfile(onset_day=-30, daily_drift=0.05))
        clean_fits, _ = build_panel(simulate_events(clean), clean.windows, threads=1)
        leaky_fits, _ = build_panel(simulate_events(leaky), leaky.windows, threads=1)
        self.assertEqual(clean_fits, leaky_fits)

    def test_leakage_accumulates_into_the_run_up(self):
        cfg = SimConfig(n_events=200, seed=4, idio_vol=0.01, leakage=LeakageProfile())
        _, panel = build_panel(simulate_events(cfg), cfg.windows, threads=1)
        self.assertAlmostEqual(caar(panel, -1) - caar(panel, -17), 16 * 0.004, delta=0.012)
        self.assertAlmostEqual(caar(panel, -1), 0.064, delta=0.02)


class PowerStudyTests(SimpleTestCase):
    def test_null_calibration(self):
        base = SimConfig(seed=101)
        cell, = power_study([(0.0, 40)], 200, base, alpha_level=0.05, policy=DecisionPolicy(), threads=1)
        frequencies = list(cell.day_frequency.values())
        self.assertEqual(len(frequencies), 41)
        self.assertLessEqual(max(frequencies), 0.12)
        self.assertGreaterEqual(float(np.mean(frequencies)), 0.035)
        self.assertLessEqual(float(np.mean(frequencies)), 0.065)
        self.assertLessEqual(cell.rejection_rate, 0.05)

    def test_power_grows_with_events(self):
        base = SimConfig(seed=202)
        weak = 0.4 * base.idio_vol
        cells = power_study([(base.idio_vol, 40), (weak, 18), (weak, 40)], 200, base,
                            alpha_level=0.05, policy=DecisionPolicy(), threads=4)
        strong, small, large = cells
        self.assertGreaterEqual(strong.rejection_rate, 0.95)
        self.assertLess(small.rejection_rate, large.rejection_rate)

    def test_thread_count_does_not_change_the_table(self):
        base = SimConfig(seed=7, leakage=LeakageProfile(onset_day=-8))
        grid = [(0.0, 10), (0.01, 10)]
        serial = power_study(grid, 8, base, alpha_level=0.05, policy=DecisionPolicy(), threads=1)
        parallel = power_study(grid, 8, base, alpha_level=0.05, policy=DecisionPolicy(), threads=4)
        self.assertEqual([c.as_dict() for c in serial], [c.as_dict() for c in parallel])

    def test_single_replication(self):
        cell, = power_study([(0.004, 10)], 1, SimConfig(seed=3), alpha_level=0.05, policy=DecisionPolicy())
        self.assertIn(cell.rejection_rate, (0.0, 1.0))

    def test_short_event_window_without_leakage_profile(self):
        base = SimConfig(seed=5, windows=WindowConfig(evt_start=-10, evt_end=5))
        self.assertEqual(cell_config(base, 0.0, 10).leakage.onset_day, -10)
        cells = power_study([(0.0, 10), (0.01, 10)], 2, base, alpha_level=0.05, policy=DecisionPolicy())
        self.assertEqual([c.n_events for c in cells], [10, 10])
        self.assertEqual(sorted(cells[0].day_frequency), list(range(-10, 6)))

    def test_default_onset_kept_for_wide_window(self):
        self.assertEqual(cell_config(SimConfig(), 0.004, 6).leakage.onset_day, -16)

    def test_options_clamp_default_onset(self):
        cfg = SimConfig.from_options({'leak_drift': 0.004, 'evt_start': -10, 'evt_end': 5})
        self.assertEqual(cfg.leakage.onset_day, -10)

    def test_replication_streams(self):
        cfg = cell_config(SimConfig(seed=12), 0.004, 6)
        self.assertEqual(cfg.leakage.daily_drift, 0.004)
        self.assertEqual(cfg.n_events, 6)
        first = run_replication(cfg, 0, alpha_level=0.05, policy=DecisionPolicy())
        again = run_replication(cfg, 0, alpha_level=0.05, policy=DecisionPolicy())
        other = run_replication(cfg, 1, alpha_level=0.05, policy=DecisionPolicy())
        self.assertEqual(first, again)
        self.assertNotEqual(first.stats, other.stats)

    def test_invalid_study(self):
        with self.assertRaises(InvalidConfig):
            power_study([(0.0, 10)], 0, SimConfig())
        with self.assertRaises(InvalidConfig):
            power_study([], 10, SimConfig())
        with self.assertRaises(InvalidConfig):
            power_study([(0.0, 1)], 10, SimConfig())

    def test_power_cell(self):
        cell = PowerCell(daily_drift=0.01, n_events=18, replications=4, rejections=3,
                         day_frequency={0: 0.5, -1: 0.25})
        self.assertEqual(cell.rejection_rate, 0.75)
        self.assertEqual(list(cell.as_dict()['day_frequency']), ['-1', '0'])
