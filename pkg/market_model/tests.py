from datetime import date

import numpy as np
from django.test import SimpleTestCase

from eventstudy.exceptions import DegenerateRegressor, NoUsableEvents, TooFewObservations
from ingest.models import AlignedEvent, EventSpec, Exclusion, WindowConfig
from simulations.generator import simulate_events
from simulations.models import SimConfig

from .estimation import abnormal_return, build_panel, fit_event, ols_fit
from .models import AbnormalReturnPanel, MarketModelFit


def make_event(key, stock, market, cfg=None):
    days = list((cfg or WindowConfig()).span)
    return AlignedEvent(
        event=EventSpec(key, 'MKT', date(2020, 1, 2)),
        key=key,
        stock_returns=dict(zip(days, stock)),
        market_returns=dict(zip(days, market)),
    )


def normal_equations(y, x):
    """Independent oracle: solve (X'X) b = X'y with an intercept column."""
    design = np.column_stack([np.ones_like(x), x])
    alpha, beta = np.linalg.solve(design.T @ design, design.T @ y)
    return alpha, beta


class OlsFitTests(SimpleTestCase):
    def test_exact_linear_relation(self):
        market = [0.01, 0.02, 0.03] * 10
        fit = ols_fit([2 * r for r in market], market)
        self.assertAlmostEqual(fit.alpha, 0.0, places=12)
        self.assertAlmostEqual(fit.beta, 2.0, places=12)
        self.assertAlmostEqual(fit.r_squared, 1.0, places=12)
        self.assertEqual(fit.n_obs, 30)

    def test_constant_stock(self):
        market = np.linspace(-0.02, 0.02, 40)
        fit = ols_fit([0.005] * 40, market)
        self.assertAlmostEqual(fit.beta, 0.0, places=14)
        self.assertAlmostEqual(fit.alpha, 0.005, places=14)
        self.assertAlmostEqual(fit.r_squared, 0.0, places=12)

    def test_matches_normal_equations(self):
        rng = np.random.default_rng(20240611)
        for _ in range(100):
            x = rng.normal(0.0, 0.012, 59)
            y = rng.normal(0.0005, 0.002) + rng.uniform(0.2, 2.0) * x + rng.normal(0.0, 0.015, 59)
            fit = ols_fit(y, x)
            alpha, beta = normal_equations(y, x)
            self.assertAlmostEqual(fit.alpha, alpha, delta=1e-10)
            self.assertAlmostEqual(fit.beta, beta, delta=1e-10)

            residuals = y - fit.alpha - fit.beta * x
            self.assertLess(abs(residuals.sum()), 1e-9 * x.size)
            self.assertLess(abs(residuals @ x), 1e-9 * x.size)
            self.assertAlmostEqual(fit.residual_variance, residuals @ residuals / (x.size - 2), places=14)
            self.assertGreaterEqual(fit.r_squared, 0.0)
            self.assertLessEqual(fit.r_squared, 1.0)

    def test_constant_market(self):
        with self.assertRaises(DegenerateRegressor):
            ols_fit(np.linspace(0, 0.01, 35), [0.001] * 35)

    def test_too_few_observations(self):
        x = np.linspace(-0.01, 0.01, 29)
        with self.assertRaises(TooFewObservations):
            ols_fit(x, x)
        ols_fit(x, x, min_obs=20)

    def test_length_mismatch(self):
        with self.assertRaises(ValueError):
            ols_fit([0.01] * 30, [0.01] * 31)


class AbnormalReturnTests(SimpleTestCase):
    def fit(self, alpha, beta):
        return MarketModelFit(alpha=alpha, beta=beta, n_obs=59, residual_variance=0.0, r_squared=1.0)

    def test_tracks_market(self):
        self.assertEqual(abnormal_return(self.fit(0.0, 1.0), 0.02, 0.02), 0.0)

    def test_zero_beta_isolates_alpha(self):
        self.assertAlmostEqual(abnormal_return(self.fit(0.001, 0.0), 0.004, 0.37), 0.003, places=15)

    def test_substitution(self):
        self.assertAlmostEqual(abnormal_return(self.fit(0.0, 2.0), 0.05, 0.02), 0.01, places=15)

    def test_expected_return(self):
        self.assertAlmostEqual(self.fit(0.001, 1.5).expected_return(0.02), 0.031, places=15)

    def test_is_stock_return_less_expected_return(self):
        fit = self.fit(0.0007, 1.2)
        self.assertEqual(abnormal_return(fit, 0.013, -0.004), 0.013 - fit.expected_return(-0.004))


class BuildPanelTests(SimpleTestCase):
    def setUp(self):
        self.cfg = WindowConfig()
        self.rng = np.random.default_rng(7)

    def market(self):
        return self.rng.normal(0.0, 0.01, len(self.cfg.span))

    def test_exact_model_has_zero_abnormal_returns(self):
        events = []
        for key, alpha, beta in (('a', 0.001, 0.8), ('b', -0.0005, 1.3)):
            market = self.market()
            events.append(make_event(key, alpha + beta * market, market))
        fits, panel = build_panel(events, self.cfg)
        self.assertEqual(list(fits), ['a', 'b'])
        self.assertAlmostEqual(fits['b'].beta, 1.3, places=10)
        for values in panel.per_event.values():
            self.assertEqual(len(values), 41)
            for value in values.values():
                self.assertLess(abs(value), 1e-10)

    def test_degenerate_event_is_excluded(self):
        market = self.market()
        flat = np.full(len(self.cfg.span), 0.001)
        events = [
            make_event('good', 0.5 * market + self.rng.normal(0, 0.01, market.size), market),
            make_event('flat', self.market(), flat),
            make_event('also-good', 1.5 * market, market),
        ]
        fits, panel = build_panel(events, self.cfg)
        self.assertEqual(panel.events, ['good', 'also-good'])
        self.assertEqual([e.event_key for e in panel.excluded], ['flat'])
        self.assertEqual(panel.excluded[0].reason, 'DegenerateRegressor')
        self.assertNotIn('flat', fits)

    def test_all_events_excluded(self):
        flat = np.full(len(self.cfg.span), 0.001)
        with self.assertRaises(NoUsableEvents):
            build_panel([make_event('flat', self.market(), flat)], self.cfg)

    def test_forty_events_by_forty_one_days(self):
        fits, panel = build_panel(simulate_events(SimConfig(n_events=40, seed=11)), self.cfg)
        self.assertEqual(panel.total_events, 40)
        self.assertEqual(len(panel.event_days), 41)
        self.assertTrue(panel.is_complete())
        self.assertTrue(all(n == 40 for n in panel.n_t.values()))

    def test_affine_transform_of_stock_returns(self):
        market = self.market()
        stock = 0.0003 + 0.9 * market + self.rng.normal(0, 0.01, market.size)
        a, b = 0.002, 1.7
        fits, panel = build_panel([make_event('x', stock, market)], self.cfg)
        fits2, panel2 = build_panel([make_event('x', a + b * stock, market)], self.cfg)
        self.assertAlmostEqual(fits2['x'].alpha, a + b * fits['x'].alpha, delta=1e-12)
        self.assertAlmostEqual(fits2['x'].beta, b * fits['x'].beta, delta=1e-10)
        for day, value in panel.per_event['x'].items():
            self.assertAlmostEqual(panel2.per_event['x'][day], b * value, delta=1e-10 * max(abs(b * value), 1e-3))

    def test_event_window_does_not_touch_fit(self):
        market = self.market()
        stock = 0.8 * market + self.rng.normal(0, 0.01, market.size)
        perturbed = stock.copy()
        perturbed[list(self.cfg.span).index(-5)] += 0.25
        fit = fit_event(make_event('x', stock, market), self.cfg)
        self.assertEqual(fit_event(make_event('x', perturbed, market), self.cfg), fit)

    def test_thread_count_does_not_change_result(self):
        events = []
        for i in range(12):
            market = self.market()
            events.append(make_event(f'e{i}', 0.7 * market + self.rng.normal(0, 0.01, market.size), market))
        serial = build_panel(events, self.cfg, threads=1)
        parallel = build_panel(events, self.cfg, threads=4)
        self.assertEqual(serial, parallel)
        self.assertEqual(list(parallel[1].per_event), [f'e{i}' for i in range(12)])

    def test_logs_events_with_gaps(self):
        market = self.market()
        days = [d for d in self.cfg.span if d != -1]
        holed = AlignedEvent(
            event=EventSpec('holed', 'MKT', date(2020, 1, 2)),
            key='holed',
            stock_returns={d: 0.9 * r for d, r in zip(self.cfg.span, market) if d != -1},
            market_returns={d: r for d, r in zip(self.cfg.span, market) if d in days},
        )
        with self.assertLogs('market_model.estimation', level='INFO') as logs:
            _, panel = build_panel([make_event('full', 1.1 * market, market), holed], self.cfg)
        self.assertFalse(panel.is_complete())
        self.assertIn('without data for 1 event(s)', logs.output[-1])

    def test_complete_panel_does_not_log_gaps(self):
        market = self.market()
        with self.assertLogs('market_model.estimation', level='INFO') as logs:
            build_panel([make_event('full', 1.1 * market, market)], self.cfg)
        self.assertFalse(any('without data' in line for line in logs.output))

    def test_passes_through_earlier_exclusions(self):
        market = self.market()
        earlier = [Exclusion('gone', 'MissingFile', 'no price file')]
        _, panel = build_panel([make_event('x', market, market)], self.cfg, exclusions=earlier)
        self.assertEqual(panel.excluded, tuple(earlier))


class AbnormalReturnPanelTests(SimpleTestCase):
    def test_gaps_and_counts(self):
        panel = AbnormalReturnPanel(
            event_days=(-1, 0, 1),
            per_event={'a': {-1: 0.01, 0: 0.02, 1: 0.0}, 'b': {0: -0.01}},
        )
        self.assertEqual(dict(panel.n_t), {-1: 1, 0: 2, 1: 1})
        self.assertEqual(panel.gaps['b'], (-1, 1))
        self.assertEqual(panel.gaps['a'], ())
        self.assertFalse(panel.is_complete())
        np.testing.assert_array_equal(panel.values_at(0), [0.02, -0.01])

    def test_rejects_days_outside_window(self):
        with self.assertRaises(ValueError):
            AbnormalReturnPanel(event_days=(0, 1), per_event={'a': {5: 0.01}})

    def test_rejects_non_finite(self):
        with self.assertRaises(ValueError):
            AbnormalReturnPanel(event_days=(0,), per_event={'a': {0: float('nan')}})
