import tempfile
from datetime import date, timedelta
from pathlib import Path

import numpy as np
import pandas as pd
from django.test import SimpleTestCase

from eventstudy.exceptions import (
    AnnouncementNotTradingDay, DuplicateDate, EmptyFile, IndexMismatch, InsufficientHistory,
    InvalidConfig, MalformedRow, MissingFile, NonPositivePrice,
)

from .alignment import align_event, align_events, event_keys
from .models import EventSpec, PriceSeries, WindowConfig
from .parsers import (
    format_event_csv, format_price_csv, load_price_file, parse_event_csv, parse_price_csv,
)


def business_days(start, periods):
    return [ts.date() for ts in pd.bdate_range(start=start, periods=periods)]


def random_series(security_id, dates, seed, vol=0.01):
    rng = np.random.default_rng(seed)
    prices = 100.0 * np.cumprod(1.0 + rng.normal(0.0, vol, len(dates)))
    return PriceSeries(security_id, tuple(zip(dates, prices.tolist())))


class ParsePriceCsvTests(SimpleTestCase):
    def test_minimal_file(self):
        series = parse_price_csv(b'date,adj_close\n2019-01-02,100.0\n2019-01-03,105.0', 'ABC')
        self.assertEqual(len(series), 2)
        self.assertEqual(series.dates, [date(2019, 1, 2), date(2019, 1, 3)])
        self.assertEqual(series.prices, [100.0, 105.0])

    def test_rows_are_sorted(self):
        forward = parse_price_csv('date,adj_close\n2019-01-02,100.0\n2019-01-03,105.0\n')
        backward = parse_price_csv('date,adj_close\n2019-01-03,105.0\n2019-01-02,100.0\n')
        self.assertEqual(forward, backward)

    def test_negative_price(self):
        with self.assertRaises(NonPositivePrice) as ctx:
            parse_price_csv('date,adj_close\n2019-01-02,100.0\n2019-01-03,-5\n')
        self.assertEqual(ctx.exception.line, 3)

    def test_zero_price(self):
        with self.assertRaises(NonPositivePrice):
            parse_price_csv('date,adj_close\n2019-01-02,0\n')

    def test_bad_date_names_the_line(self):
        with self.assertRaises(MalformedRow) as ctx:
            parse_price_csv('date,adj_close\n2019-01-02,100\n02/01/2019,101\n')
        self.assertEqual(ctx.exception.line, 3)
        self.assertIn('02/01/2019', str(ctx.exception))

    def test_non_numeric_price(self):
        with self.assertRaises(MalformedRow):
            parse_price_csv('date,adj_close\n2019-01-02,abc\n')

    def test_infinite_price(self):
        with self.assertRaises(MalformedRow):
            parse_price_csv('date,adj_close\n2019-01-02,inf\n')

    def test_duplicate_date(self):
        with self.assertRaises(DuplicateDate):
            parse_price_csv('date,adj_close\n2019-01-02,100\n2019-01-02,101\n')

    def test_wrong_header(self):
        with self.assertRaises(MalformedRow) as ctx:
            parse_price_csv('day,close\n2019-01-02,100\n')
        self.assertEqual(ctx.exception.line, 1)

    def test_crlf_and_bom(self):
        series = parse_price_csv('\ufeffdate,adj_close\r\n2019-01-02,100.5\r\n2019-01-03,101\r\n'.encode('utf-8'))
        self.assertEqual(series.prices, [100.5, 101.0])

    def test_empty_input(self):
        with self.assertRaises(EmptyFile):
            parse_price_csv(b'')
        with self.assertRaises(EmptyFile):
            parse_price_csv('date,adj_close\n')

    def test_format_then_parse_is_identity(self):
        series = random_series('XYZ', business_days('2018-03-01', 40), seed=3)
        self.assertEqual(parse_price_csv(format_price_csv(series), 'XYZ'), series)

    def test_extra_fields_rejected(self):
        for row in ('2019-01-02,100.0,999', '2019-01-02,1,234.5'):
            with self.subTest(row=row), self.assertRaises(MalformedRow) as ctx:
                parse_price_csv(f'date,adj_close\n2019-01-01,99.0\n{row}\n2019-01-03,105.0\n')
            self.assertEqual(ctx.exception.line, 3)
        with self.assertRaises(MalformedRow) as ctx:
            parse_price_csv(b'date,adj_close\n2019-01-02,100.0,999\n2019-01-03,105.0\n')
        self.assertEqual(ctx.exception.line, 2)

    def test_unpadded_date_rejected(self):
        with self.assertRaises(MalformedRow) as ctx:
            parse_price_csv('date,adj_close\n2019-01-02,100.0\n2019-1-3,101.0\n')
        self.assertEqual(ctx.exception.line, 3)


class ParseEventCsvTests(SimpleTestCase):
    header = 'security_id,market_id,announcement_date,label\n'

    def test_single_row(self):
        events = parse_event_csv(self.header + 'ABC,FTSE,2019-06-03,ABC/DEF merger\n')
        self.assertEqual(events, [EventSpec('ABC', 'FTSE', date(2019, 6, 3), 'ABC/DEF merger')])

    def test_fifty_eight_rows_keep_order(self):
        days = business_days('2008-01-02', 58)
        body = ''.join(f'S{i:02d},FTSE,{d.isoformat()},\n' for i, d in enumerate(reversed(days)))
        events = parse_event_csv(self.header + body)
        self.assertEqual(len(events), 58)
        self.assertEqual(events[0].security_id, 'S00')
        self.assertEqual(events[0].announcement_date, days[-1])

    def test_empty_body(self):
        with self.assertRaises(EmptyFile):
            parse_event_csv(self.header)

    def test_blank_security(self):
        with self.assertRaises(MalformedRow) as ctx:
            parse_event_csv(self.header + 'ABC,FTSE,2019-06-03,\n,FTSE,2019-06-04,\n')
        self.assertEqual(ctx.exception.line, 3)

    def test_format_then_parse_is_identity(self):
        events = [
            EventSpec('ABC', 'FTSE', date(2019, 6, 3), 'first'),
            EventSpec('DEF', 'FTSE', date(2019, 7, 1), ''),
        ]
        self.assertEqual(parse_event_csv(format_event_csv(events)), events)

    def test_label_with_comma_and_quote_survives_round_trip(self):
        events = [EventSpec('ABC', 'FTSE', date(2019, 6, 3), 'Acme, Inc. "bid"')]
        text = format_event_csv(events)
        self.assertIn('"Acme, Inc. ""bid"""', text)
        self.assertEqual(parse_event_csv(text), events)

    def test_extra_fields_rejected(self):
        with self.assertRaises(MalformedRow) as ctx:
            parse_event_csv(self.header + 'ABC,FTSE,2019-06-03,Acme, Inc. bid\n')
        self.assertEqual(ctx.exception.line, 2)

    def test_unpadded_announcement_date_rejected(self):
        with self.assertRaises(MalformedRow):
            parse_event_csv(self.header + 'ABC,FTSE,2019-6-3,\n')

    def test_default_labels_and_duplicates(self):
        events = [
            EventSpec('ABC', 'FTSE', date(2019, 6, 3)),
            EventSpec('ABC', 'FTSE', date(2019, 6, 3)),
            EventSpec('DEF', 'FTSE', date(2019, 6, 3), 'deal'),
        ]
        self.assertEqual(event_keys(events), ['ABC:2019-06-03', 'ABC:2019-06-03#2', 'deal'])


class WindowConfigTests(SimpleTestCase):
    def test_defaults(self):
        cfg = WindowConfig()
        self.assertEqual(cfg.estimation_length, 59)
        self.assertEqual(len(cfg.event_days), 41)
        self.assertEqual(len(cfg.span), 100)

    def test_overlapping_windows(self):
        with self.assertRaises(InvalidConfig):
            WindowConfig(est_end=-30, evt_start=-30)

    def test_event_window_must_contain_day0(self):
        with self.assertRaises(InvalidConfig):
            WindowConfig(evt_start=-30, evt_end=-1)

    def test_estimation_floor(self):
        with self.assertRaises(InvalidConfig):
            WindowConfig(est_start=-50, est_end=-31)
        WindowConfig(est_start=-50, est_end=-31, min_estimation_days=20)

    def test_from_settings_overrides(self):
        cfg = WindowConfig.from_settings(evt_end=5, est_start=None)
        self.assertEqual(cfg.evt_end, 5)
        self.assertEqual(cfg.est_start, -89)


class AlignEventTests(SimpleTestCase):
    def setUp(self):
        self.cfg = WindowConfig()
        self.calendar = business_days('2019-01-02', 121)
        self.market = random_series('MKT', self.calendar, seed=1)
        self.stock = random_series('ABC', self.calendar, seed=2)
        self.event = EventSpec('ABC', 'MKT', self.calendar[90])

    def test_full_coverage(self):
        aligned = align_event(self.event, self.stock, self.market, self.cfg)
        self.assertEqual(aligned.coverage, frozenset(range(-89, 11)))
        self.assertEqual(len(aligned.coverage), 100)
        self.assertEqual(aligned.day0_date, self.calendar[90])
        self.assertEqual(aligned.dates[-89], self.calendar[1])
        self.assertEqual(set(aligned.stock_returns), set(aligned.market_returns))

    def test_returns_match_prices(self):
        aligned = align_event(self.event, self.stock, self.market, self.cfg)
        prices = self.stock.prices
        self.assertAlmostEqual(aligned.stock_returns[0], prices[90] / prices[89] - 1.0, places=14)

    def test_weekend_announcement_moves_to_next_trading_day(self):
        monday = next(i for i in range(91, 110) if self.calendar[i].weekday() == 0)
        saturday = self.calendar[monday] - timedelta(days=2)
        event = EventSpec('ABC', 'MKT', saturday)
        aligned = align_event(event, self.stock, self.market, self.cfg)
        self.assertEqual(aligned.day0_date, self.calendar[monday])

        with self.assertRaises(AnnouncementNotTradingDay):
            align_event(event, self.stock, self.market, self.cfg, strict_day0=True)

    def test_short_stock_history(self):
        stock = PriceSeries('ABC', self.stock.observations[70:])
        with self.assertRaises(InsufficientHistory):
            align_event(self.event, stock, self.market, self.cfg)

    def test_short_market_history(self):
        market = PriceSeries('MKT', self.market.observations[:95])
        with self.assertRaises(InsufficientHistory):
            align_event(self.event, self.stock, market, self.cfg)

    def test_stock_date_missing_from_market(self):
        saturday = next(d for d in (self.calendar[50] + timedelta(days=k) for k in range(7)) if d.weekday() == 5)
        observations = sorted(self.stock.observations + ((saturday, 101.0),))
        with self.assertRaises(IndexMismatch):
            align_event(self.event, PriceSeries('ABC', tuple(observations)), self.market, self.cfg)

    def test_missing_stock_row_drops_two_returns(self):
        observations = tuple(o for i, o in enumerate(self.stock.observations) if i != 50)
        aligned = align_event(self.event, PriceSeries('ABC', observations), self.market, self.cfg)
        # Row 50 is event-day -40; the returns into and out of it vanish
        self.assertNotIn(-40, aligned.coverage)
        self.assertNotIn(-39, aligned.coverage)
        self.assertEqual(len(aligned.coverage), 98)

    def test_translation_invariance(self):
        shift = timedelta(days=7)

        def shifted(series):
            return PriceSeries(series.security_id, tuple((d + shift, p) for d, p in series.observations))

        event = EventSpec('ABC', 'MKT', self.event.announcement_date + shift)
        moved = align_event(event, shifted(self.stock), shifted(self.market), self.cfg)
        original = align_event(self.event, self.stock, self.market, self.cfg)
        self.assertEqual(dict(moved.stock_returns), dict(original.stock_returns))
        self.assertEqual(dict(moved.market_returns), dict(original.market_returns))

    def test_coverage_never_exceeds_span(self):
        calendar = business_days('2019-01-02', 200)
        market = random_series('MKT', calendar, seed=4)
        stock = random_series('ABC', calendar, seed=5)
        for position in (90, 120, 150, 189):
            aligned = align_event(EventSpec('ABC', 'MKT', calendar[position]), stock, market, self.cfg)
            self.assertLessEqual(len(aligned.coverage), self.cfg.evt_end - self.cfg.est_start + 1)


class AlignEventsTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.data_dir = Path(self.tmp.name)
        self.calendar = business_days('2019-01-02', 130)
        for security_id, seed in (('MKT', 1), ('ABC', 2), ('DEF', 3)):
            series = random_series(security_id, self.calendar, seed)
            (self.data_dir / f'{security_id}.csv').write_text(format_price_csv(series))

    def test_missing_file_becomes_exclusion(self):
        events = [
            EventSpec('ABC', 'MKT', self.calendar[95]),
            EventSpec('ZZZ', 'MKT', self.calendar[95]),
            EventSpec('DEF', 'MKT', self.calendar[100], 'def'),
        ]
        aligned, exclusions = align_events(events, self.data_dir, WindowConfig())
        self.assertEqual([a.key for a in aligned], [f'ABC:{self.calendar[95].isoformat()}', 'def'])
        self.assertEqual(len(exclusions), 1)
        self.assertEqual(exclusions[0].reason, 'MissingFile')

    def test_load_price_file(self):
        series = load_price_file(self.data_dir, 'ABC')
        self.assertEqual(series.security_id, 'ABC')
        self.assertEqual(len(series), 130)
        with self.assertRaises(MissingFile):
            load_price_file(self.data_dir, 'NOPE')

    def test_malformed_file_names_file(self):
        (self.data_dir / 'BAD.csv').write_text('date,adj_close\n2019-01-02,x\n')
        with self.assertRaises(MalformedRow) as ctx:
            load_price_file(self.data_dir, 'BAD')
        self.assertIn('BAD.csv', str(ctx.exception))
