import math

import mpmath
import numpy as np
from django.test import SimpleTestCase

from eventstudy.exceptions import (
    InsufficientCrossSection, InvalidConfig, NoData, UndefinedFraction, UnknownEvent, ZeroDispersion,
)
from market_model.models import AbnormalReturnPanel

from .distributions import critical_value, t_cdf, two_sided_p_value
from .models import Decision, DecisionPolicy, DayStat
from .statistics import (
    aar, analyze, caar, caar_fraction, car, compare_studies, cross_sectional_sigma, day_stats,
    decide_hypothesis, format_percent, reaction_fraction, run_up_profile, significance_scan, t_stat,
)

EVENT_DAYS = tuple(range(-30, 11))


def one_day_panel(values, day=0):
    return AbnormalReturnPanel(event_days=(day,), per_event={f'e{i}': {day: v} for i, v in enumerate(values)})


def random_panel(rng, n_events=10, drift=0.0, scale=0.02):
    matrix = rng.normal(drift, scale, (n_events, len(EVENT_DAYS)))
    return AbnormalReturnPanel(
        event_days=EVENT_DAYS,
        per_event={f'e{i}': dict(zip(EVENT_DAYS, row.tolist())) for i, row in enumerate(matrix)},
    )


def stats_with_caar(caars):
    return [
        DayStat(event_day=day, aar=None, sigma=None, n=0, t_stat=None, p_value=None,
                significant=False, caar=value)
        for day, value in sorted(caars.items())
    ]


def oracle_two_sided_p(t, df):
    """P(|T| >= |t|) from mpmath's regularized incomplete beta."""
    mpmath.mp.dps = 40
    x = mpmath.mpf(df) / (df + mpmath.mpf(t) ** 2)
    return float(mpmath.betainc(mpmath.mpf(df) / 2, mpmath.mpf(1) / 2, 0, x, regularized=True))


def oracle_critical_value(alpha_level, df):
    mpmath.mp.dps = 40
    return float(mpmath.findroot(lambda t: mpmath.betainc(
        mpmath.mpf(df) / 2, mpmath.mpf(1) / 2, 0, df / (df + t ** 2), regularized=True) - alpha_level,
        mpmath.mpf(2)))


class DistributionTests(SimpleTestCase):
    def test_critical_values_against_reference(self):
        for df, expected in ((5, 2.5705818366), (17, 2.1098155778), (39, 2.0226909010)):
            self.assertAlmostEqual(critical_value(0.05, df), expected, delta=1e-6)
            self.assertAlmostEqual(critical_value(0.05, df), oracle_critical_value(0.05, df), delta=1e-9)

    def test_p_value_against_oracle(self):
        for df in (1, 2, 5, 17, 39, 120):
            for t in (0.0, 0.5, 1.96, -2.3, 4.0, 12.5):
                self.assertAlmostEqual(two_sided_p_value(t, df), oracle_two_sided_p(t, df), delta=1e-12)

    def test_cdf(self):
        self.assertAlmostEqual(t_cdf(0.0, 7), 0.5, places=15)
        self.assertAlmostEqual(t_cdf(1.3, 7) + t_cdf(-1.3, 7), 1.0, places=14)
        self.assertAlmostEqual(t_cdf(critical_value(0.05, 17), 17), 0.975, places=12)

    def test_far_tail_p_value_keeps_precision(self):
        p = two_sided_p_value(30.0, 40)
        self.assertGreater(p, 0.0)
        self.assertAlmostEqual(p / oracle_two_sided_p(30.0, 40), 1.0, places=10)
        self.assertEqual(p, 2.0 * t_cdf(-30.0, 40))
        self.assertEqual(t_cdf(-math.inf, 5), 0.0)
        self.assertEqual(t_cdf(math.inf, 5), 1.0)

    def test_edge_levels(self):
        self.assertEqual(critical_value(1.0, 10), 0.0)
        self.assertTrue(math.isinf(critical_value(0.0, 10)))
        self.assertEqual(two_sided_p_value(math.inf, 3), 0.0)
        with self.assertRaises(ValueError):
            two_sided_p_value(1.0, 0)


class AarTests(SimpleTestCase):
    def test_two_point_mean(self):
        value, n = aar(one_day_panel([0.01, 0.03]), 0)
        self.assertAlmostEqual(value, 0.02, places=15)
        self.assertEqual(n, 2)

    def test_zeros(self):
        self.assertEqual(aar(one_day_panel([0.0, 0.0, 0.0]), 0), (0.0, 3))

    def test_four_events(self):
        value, n = aar(one_day_panel([0.01, -0.01, 0.02, 0.02]), 0)
        self.assertAlmostEqual(value, 0.01, places=15)
        self.assertEqual(n, 4)

    def test_no_data(self):
        panel = AbnormalReturnPanel(event_days=(0, 1), per_event={'a': {0: 0.01}})
        with self.assertRaises(NoData):
            aar(panel, 1)
        with self.assertRaises(NoData):
            aar(panel, 5)


class SigmaAndTStatTests(SimpleTestCase):
    def test_sample_standard_deviation(self):
        sigma = cross_sectional_sigma(one_day_panel([0.01, 0.01, 0.03, 0.03]), 0)
        self.assertAlmostEqual(sigma, math.sqrt(0.0004 / 3), places=12)
        self.assertAlmostEqual(sigma, 0.0115470, places=7)

    def test_equal_values(self):
        self.assertEqual(cross_sectional_sigma(one_day_panel([0.013] * 5), 0), 0.0)

    def test_single_event(self):
        with self.assertRaises(InsufficientCrossSection):
            cross_sectional_sigma(one_day_panel([0.01]), 0)

    def test_t_stat(self):
        self.assertAlmostEqual(t_stat(0.02, math.sqrt(0.0004 / 3), 4), 3.4641, places=4)
        self.assertEqual(t_stat(0.0, 0.01, 10), 0.0)
        self.assertEqual(t_stat(0.0, 0.0, 10), 0.0)

    def test_zero_dispersion(self):
        with self.assertRaises(ZeroDispersion):
            t_stat(0.01, 0.0, 5)
        with self.assertRaises(InsufficientCrossSection):
            t_stat(0.01, 0.02, 1)


class CumulativeTests(SimpleTestCase):
    def test_car_prefix_sum(self):
        panel = AbnormalReturnPanel(event_days=(-30, -29, -28), per_event={'a': {-30: 0.01, -29: -0.005, -28: 0.02}})
        self.assertAlmostEqual(car(panel, 'a', -28), 0.025, places=15)
        self.assertAlmostEqual(car(panel, 'a', -30), 0.01, places=15)

    def test_car_zero_and_single_day(self):
        zeros = AbnormalReturnPanel(event_days=(-30, -29), per_event={'a': {-30: 0.0, -29: 0.0}})
        self.assertEqual(car(zeros, 'a', -29), 0.0)
        single = AbnormalReturnPanel(event_days=(-30, -29), per_event={'a': {-30: 0.05}})
        self.assertEqual(car(single, 'a', -30), 0.05)
        # the missing day adds nothing and is reported as a gap
        self.assertEqual(car(single, 'a', -29), 0.05)
        self.assertEqual(single.gaps['a'], (-29,))

    def test_car_unknown_event(self):
        with self.assertRaises(UnknownEvent):
            car(one_day_panel([0.01, 0.02]), 'nope', 0)

    def test_caar_sequence(self):
        panel = AbnormalReturnPanel(
            event_days=(-30, -29, -28),
            per_event={'a': {-30: 0.01, -29: 0.0, -28: 0.03}, 'b': {-30: 0.01, -29: -0.01, -28: 0.01}},
        )
        for day, expected in zip((-30, -29, -28), (0.01, 0.005, 0.025)):
            self.assertAlmostEqual(caar(panel, day), expected, places=15)

    def test_mirrored_events_cancel(self):
        rng = np.random.default_rng(1)
        row = dict(zip(EVENT_DAYS, rng.normal(0, 0.02, len(EVENT_DAYS)).tolist()))
        panel = AbnormalReturnPanel(event_days=EVENT_DAYS, per_event={'a': row, 'b': {d: -v for d, v in row.items()}})
        for day in EVENT_DAYS:
            self.assertAlmostEqual(caar(panel, day), 0.0, places=15)

    def test_caar_is_prefix_sum_of_aar(self):
        rng = np.random.default_rng(2024)
        for _ in range(50):
            panel = random_panel(rng, n_events=int(rng.integers(2, 40)))
            stats = day_stats(panel)
            running = 0.0
            for stat in stats:
                running += aar(panel, stat.event_day)[0]
                self.assertLess(abs(stat.caar - running), 1e-12)
                self.assertLess(abs(caar(panel, stat.event_day) - running), 1e-12)
            self.assertAlmostEqual(stats[0].caar, stats[0].aar, places=15)


class DayStatPropertyTests(SimpleTestCase):
    def setUp(self):
        self.panel = random_panel(np.random.default_rng(99), n_events=12, drift=0.002)

    def test_t_sign_follows_aar(self):
        for stat in day_stats(self.panel):
            self.assertGreater(stat.sigma, 0)
            self.assertEqual(np.sign(stat.t_stat), np.sign(stat.aar))

    def test_permutation_invariance(self):
        reversed_panel = AbnormalReturnPanel(
            event_days=EVENT_DAYS,
            per_event=dict(reversed(list(self.panel.per_event.items()))),
        )
        for a, b in zip(day_stats(self.panel), day_stats(reversed_panel)):
            self.assertEqual(a.n, b.n)
            for field in ('aar', 'sigma', 't_stat', 'p_value', 'caar'):
                self.assertAlmostEqual(getattr(a, field), getattr(b, field), places=13)

    def test_duplicating_every_event(self):
        doubled = AbnormalReturnPanel(
            event_days=EVENT_DAYS,
            per_event={
                **self.panel.per_event,
                **{f'{key}-copy': values for key, values in self.panel.per_event.items()},
            },
        )
        n = self.panel.total_events
        for a, b in zip(day_stats(self.panel), day_stats(doubled)):
            self.assertAlmostEqual(a.aar, b.aar, places=15)
            # population dispersion is what duplication preserves
            self.assertAlmostEqual(
                a.sigma * math.sqrt((n - 1) / n), b.sigma * math.sqrt((2 * n - 1) / (2 * n)),
                delta=1e-12,
            )
            self.assertAlmostEqual(b.t_stat / a.t_stat, math.sqrt((2 * n - 1) / (n - 1)), delta=1e-9)

    def test_gap_days_have_fewer_events(self):
        per_event = {key: dict(values) for key, values in self.panel.per_event.items()}
        del per_event['e0'][-5]
        stats = {s.event_day: s for s in day_stats(AbnormalReturnPanel(EVENT_DAYS, per_event))}
        self.assertEqual(stats[-5].n, 11)
        self.assertEqual(stats[-4].n, 12)

    def test_zero_dispersion_day(self):
        per_event = {key: dict(values) for key, values in self.panel.per_event.items()}
        for values in per_event.values():
            values[3] = 0.01
        stats = {s.event_day: s for s in day_stats(AbnormalReturnPanel(EVENT_DAYS, per_event))}
        self.assertEqual(stats[3].sigma, 0.0)
        self.assertIsNone(stats[3].t_stat)
        self.assertIsNone(stats[3].p_value)


class SignificanceScanTests(SimpleTestCase):
    def stat(self, day, t, n=18):
        return DayStat(event_day=day, aar=0.01, sigma=0.01, n=n, t_stat=t, p_value=None,
                       significant=False, caar=0.0)

    def test_all_zero(self):
        self.assertEqual(significance_scan([self.stat(d, 0.0) for d in EVENT_DAYS], 0.05, df=17), [])

    def test_single_large_t(self):
        stats = [self.stat(d, 10.0 if d == -11 else 0.5) for d in EVENT_DAYS]
        self.assertEqual(significance_scan(stats, 0.05, df=17), [-11])
        self.assertEqual(significance_scan(stats, 0.05), [-11])

    def test_threshold_uses_critical_value(self):
        crit = critical_value(0.05, 17)
        stats = [self.stat(-2, crit * 1.0001), self.stat(-1, crit * 0.9999), self.stat(0, -crit * 1.0001)]
        self.assertEqual(significance_scan(stats, 0.05), [-2, 0])

    def test_output_sorted(self):
        stats = [self.stat(d, 5.0) for d in (3, -8, 0)]
        self.assertEqual(significance_scan(stats, 0.05), [-8, 0, 3])

    def test_alpha_extremes(self):
        panel = random_panel(np.random.default_rng(5), n_events=10)
        stats = day_stats(panel)
        self.assertEqual(significance_scan(stats, 1.0), list(EVENT_DAYS))
        self.assertEqual(significance_scan(stats, 1e-12), [])

    def test_undefined_t_is_skipped(self):
        stats = [self.stat(0, None, n=1)]
        self.assertEqual(significance_scan(stats, 1.0), [])


class DecisionTests(SimpleTestCase):
    def test_scattered_early_days(self):
        self.assertEqual(decide_hypothesis([-29, -17, -14, -11]), Decision.ACCEPT_H0)

    def test_consecutive_run_up(self):
        self.assertEqual(decide_hypothesis([-3, -2, -1]), Decision.REJECT_H0)

    def test_empty(self):
        self.assertEqual(decide_hypothesis([]), Decision.ACCEPT_H0)

    def test_run_must_lie_inside_window(self):
        self.assertEqual(decide_hypothesis([-12, -11, -10]), Decision.ACCEPT_H0)
        self.assertEqual(decide_hypothesis([-12, -11, -10], DecisionPolicy(run_up_start=-12)), Decision.REJECT_H0)

    def test_day_zero_does_not_extend_a_run(self):
        self.assertEqual(decide_hypothesis([-2, -1, 0]), Decision.ACCEPT_H0)

    def test_min_run(self):
        self.assertEqual(decide_hypothesis([-8, 0], DecisionPolicy(min_run=1)), Decision.REJECT_H0)
        self.assertEqual(decide_hypothesis([-5, -4], DecisionPolicy(min_run=2)), Decision.REJECT_H0)

    def test_invalid_policy(self):
        with self.assertRaises(InvalidConfig):
            DecisionPolicy(min_run=0)
        with self.assertRaises(InvalidConfig):
            DecisionPolicy(run_up_start=-1, run_up_end=-5)


class ReactionFractionTests(SimpleTestCase):
    def test_first_period(self):
        fraction = reaction_fraction(stats_with_caar({-1: 0.037, 0: 0.061}))
        self.assertAlmostEqual(fraction, 0.6066, places=4)
        self.assertEqual(format_percent(fraction), '60.7%')

    def test_second_period(self):
        fraction = reaction_fraction(stats_with_caar({-1: 0.025, 0: 0.077}))
        self.assertAlmostEqual(fraction, 0.3247, places=4)
        self.assertEqual(format_percent(fraction), '32.5%')

    def test_zero_before_announcement(self):
        self.assertEqual(reaction_fraction(stats_with_caar({-1: 0.0, 0: 0.05})), 0.0)

    def test_undefined(self):
        with self.assertRaises(UndefinedFraction):
            reaction_fraction(stats_with_caar({-1: 0.01, 0: 0.0}))

    def test_other_days(self):
        stats = stats_with_caar({-4: 0.0166, -1: 0.03, 0: 0.04})
        self.assertEqual(format_percent(caar_fraction(stats, -4)), '41.5%')
        with self.assertRaises(UndefinedFraction):
            caar_fraction(stats, -20)


class AnalyzeTests(SimpleTestCase):
    def test_leakage_panel_is_rejected(self):
        rng = np.random.default_rng(8)
        matrix = rng.normal(0.0, 0.01, (40, len(EVENT_DAYS)))
        matrix[:, EVENT_DAYS.index(-10):EVENT_DAYS.index(0)] += 0.02
        matrix[:, EVENT_DAYS.index(0)] += 0.05
        panel = AbnormalReturnPanel(
            event_days=EVENT_DAYS,
            per_event={f'e{i}': dict(zip(EVENT_DAYS, row.tolist())) for i, row in enumerate(matrix)},
        )
        result = analyze(panel, alpha_level=0.05, policy=DecisionPolicy())
        self.assertEqual(result.hypothesis_decision, Decision.REJECT_H0)
        self.assertTrue(set(range(-10, 1)) <= set(result.significant_days))
        self.assertEqual([s.event_day for s in result.stats], list(EVENT_DAYS))
        self.assertLess(result.stat(-5).p_value, 0.05)
        self.assertEqual({s.event_day for s in result.stats if s.significant}, set(result.significant_days))
        self.assertAlmostEqual(result.reaction_fraction, result.caar_at(-1) / result.caar_at(0), places=15)
        self.assertEqual(result.run_up.significant_days, tuple(d for d in result.significant_days if d < 0))

    def test_noise_panel_is_accepted(self):
        result = analyze(random_panel(np.random.default_rng(12), n_events=40), alpha_level=0.05,
                         policy=DecisionPolicy())
        self.assertEqual(result.hypothesis_decision, Decision.ACCEPT_H0)

    def test_undefined_reaction_fraction_is_none(self):
        panel = AbnormalReturnPanel(
            event_days=(-1, 0),
            per_event={'a': {-1: 0.01, 0: -0.01}, 'b': {-1: 0.02, 0: -0.02}},
        )
        result = analyze(panel, alpha_level=0.05, policy=DecisionPolicy(run_up_start=-1))
        self.assertIsNone(result.reaction_fraction)

    def test_gaps_reported(self):
        panel = AbnormalReturnPanel(
            event_days=(-1, 0),
            per_event={'a': {-1: 0.01, 0: 0.03}, 'b': {0: 0.02}, 'c': {-1: -0.01, 0: 0.01}},
        )
        result = analyze(panel, alpha_level=0.05, policy=DecisionPolicy(run_up_start=-1))
        self.assertEqual(dict(result.gaps), {'b': (-1,)})


class RunUpAndComparisonTests(SimpleTestCase):
    def stats(self, aars):
        out, running = [], 0.0
        for day, value in zip(range(-len(aars) + 1, 1), aars):
            running += value
            out.append(DayStat(event_day=day, aar=value, sigma=0.01, n=10, t_stat=1.0, p_value=0.3,
                               significant=day == -2, caar=running))
        return out

    def test_run_up_profile(self):
        profile = run_up_profile(self.stats([0.01, -0.02, 0.005, 0.01, 0.002, 0.03]))
        self.assertEqual(profile.days, 5)
        self.assertEqual(profile.positive_aar_days, 4)
        self.assertAlmostEqual(profile.positive_aar_share, 0.8, places=15)
        self.assertEqual(profile.trough_caar_day, -4)
        self.assertAlmostEqual(profile.trough_caar, -0.01, places=15)
        self.assertEqual(profile.peak_caar_day, -5)
        self.assertAlmostEqual(profile.build_up, 0.017, places=15)
        self.assertEqual(profile.significant_days, (-2,))
        self.assertAlmostEqual(
            profile.aar_dispersion, float(np.std([0.01, -0.02, 0.005, 0.01, 0.002], ddof=1)), places=15,
        )

    def test_compare_studies(self):
        rng = np.random.default_rng(3)
        calm = analyze(random_panel(rng, n_events=20, scale=0.01), alpha_level=0.05, policy=DecisionPolicy())
        noisy = analyze(random_panel(rng, n_events=20, scale=0.03), alpha_level=0.05, policy=DecisionPolicy())
        comparison = compare_studies(calm, noisy, 'before', 'after')
        self.assertAlmostEqual(comparison.deltas['caar_day0'], noisy.caar_at(0) - calm.caar_at(0), places=15)
        self.assertGreater(comparison.dispersion_ratio, 1.5)
        data = comparison.as_dict()
        self.assertEqual(data['first']['label'], 'before')
        self.assertEqual(data['second']['hypothesis_decision'], noisy.hypothesis_decision.value)
