from datetime import date

from django.test import SimpleTestCase

from eventstudy.exceptions import TooShort
from ingest.models import PriceSeries

from .calculations import simple_returns
from .models import ReturnSeries


def series(*prices):
    return PriceSeries('ABC', tuple((date(2019, 1, 2 + i), p) for i, p in enumerate(prices)))


class SimpleReturnsTests(SimpleTestCase):
    def test_two_prices(self):
        rets = simple_returns(series(100.0, 105.0))
        self.assertEqual(rets.dates, [date(2019, 1, 3)])
        self.assertAlmostEqual(rets.values[0], 0.05, places=15)

    def test_flat_prices(self):
        self.assertEqual(simple_returns(series(50.0, 50.0, 50.0)).values, [0.0, 0.0])

    def test_halving_then_doubling(self):
        rets = simple_returns(series(50.0, 25.0, 50.0))
        self.assertEqual(rets.values, [-0.5, 1.0])

    def test_scale_invariance(self):
        prices = [100.0, 101.5, 99.25, 103.0]
        base = simple_returns(series(*prices)).values
        scaled = simple_returns(series(*(p * 7.3 for p in prices))).values
        for a, b in zip(base, scaled):
            self.assertAlmostEqual(a, b, delta=1e-12 * max(abs(a), 1e-3))

    def test_one_price_is_too_short(self):
        with self.assertRaises(TooShort):
            simple_returns(series(100.0))

    def test_compounding_recovers_the_price_ratio(self):
        prices = [100.0, 101.5, 99.25, 103.0, 102.2]
        growth = 1.0
        for ret in simple_returns(series(*prices)).values:
            growth *= 1.0 + ret
        self.assertAlmostEqual(growth, prices[-1] / prices[0], places=12)


class ReturnSeriesTests(SimpleTestCase):
    def test_rejects_total_loss(self):
        with self.assertRaises(ValueError):
            ReturnSeries('ABC', ((date(2019, 1, 2), -1.0),))

    def test_as_dict(self):
        rets = ReturnSeries('ABC', ((date(2019, 1, 2), 0.01),))
        self.assertEqual(rets.as_dict(), {date(2019, 1, 2): 0.01})
