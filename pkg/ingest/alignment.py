"""Map calendar prices onto trading-day event time.

The market index defines the trading calendar: event-day k is the k-th
market trading day after (or before, for k < 0) the announcement day. A stock
return on day k exists only when the stock has prices on both market days k-1
and k; missing stock rows therefore drop days from coverage rather than
stretching a return over two sessions.
"""
import logging
from collections import Counter

import numpy as np

from eventstudy.exceptions import (
    AnnouncementNotTradingDay, DataError, IndexMismatch, InsufficientHistory,
)
from returns.calculations import simple_returns

from .models import AlignedEvent, Exclusion, PriceSeries
from .parsers import load_price_file

logger = logging.getLogger(__name__)


def _day0_position(event, market, strict_day0):
    calendar = np.array(market.dates, dtype='datetime64[D]')
    announced = np.datetime64(event.announcement_date, 'D')
    position = int(calendar.searchsorted(announced, side='left'))
    if position >= len(calendar):
        raise InsufficientHistory(
            f'{event.security_id}: announcement {event.announcement_date} is after the last '
            f'{market.security_id} trading day'
        )
    if calendar[position] != announced:
        if strict_day0:
            raise AnnouncementNotTradingDay(
                f'{event.security_id}: {event.announcement_date} is not a {market.security_id} trading day'
            )
        logger.warning(
            '%s: announcement %s is not a trading day, using %s as day 0',
            event.security_id, event.announcement_date, market.dates[position],
        )
    return position


def align_event(event, stock, market, cfg, strict_day0=False, key=None):
    """Build the AlignedEvent for one announcement.

    Raises InsufficientHistory when the market calendar does not reach from
    est_start - 1 to evt_end around day 0, or when fewer than
    ``cfg.min_estimation_days`` estimation days have paired returns.
    """
    key = key or event.label or event.default_label
    position = _day0_position(event, market, strict_day0)

    first = position + cfg.est_start - 1
    last = position + cfg.evt_end
    if first < 0 or last >= len(market):
        raise InsufficientHistory(
            f'{key}: {market.security_id} has {position} trading days before and '
            f'{len(market) - position - 1} after day 0; need {1 - cfg.est_start} and {cfg.evt_end}'
        )

    calendar = market.dates[first:last + 1]
    day0_date = market.dates[position]
    if strict_day0 and day0_date not in set(stock.dates):
        raise AnnouncementNotTradingDay(f'{key}: {stock.security_id} has no price on day 0 ({day0_date})')

    window = stock.between(calendar[0], calendar[-1])
    offsets = {d: i + cfg.est_start - 1 for i, d in enumerate(calendar)}
    strays = [d for d in window.dates if d not in offsets]
    if strays:
        raise IndexMismatch(
            f'{key}: {market.security_id} is missing {len(strays)} dates that {stock.security_id} '
            f'trades on (first {strays[0]})'
        )
    if len(window) < 2:
        raise InsufficientHistory(f'{key}: {stock.security_id} has {len(window)} prices in the study span')

    market_returns = simple_returns(PriceSeries(market.security_id, market.observations[first:last + 1]))
    market_by_day = {offsets[d]: r for d, r in market_returns.observations}

    stock_by_day = {}
    previous_dates = window.dates[:-1]
    for previous, (d, ret) in zip(previous_dates, simple_returns(window).observations):
        day = offsets[d]
        # Consecutive on the market calendar only
        if offsets[previous] == day - 1:
            stock_by_day[day] = ret

    covered = {day: ret for day, ret in stock_by_day.items() if cfg.est_start <= day <= cfg.evt_end}
    estimation_days = sum(1 for day in covered if cfg.est_start <= day <= cfg.est_end)
    if estimation_days < cfg.min_estimation_days:
        raise InsufficientHistory(
            f'{key}: {estimation_days} paired estimation-window days, need {cfg.min_estimation_days}'
        )

    aligned = AlignedEvent(
        event=event,
        key=key,
        stock_returns=covered,
        market_returns={day: market_by_day[day] for day in covered},
        day0_date=day0_date,
        dates={day: d for d, day in offsets.items() if day in covered},
    )
    logger.debug('%s: aligned %d event-days around %s', key, len(aligned.coverage), day0_date)
    return aligned


def event_keys(events):
    """Unique keys in input order; repeated labels get #2, #3, ..."""
    seen = Counter()
    keys = []
    for event in events:
        base = event.label or event.default_label
        seen[base] += 1
        keys.append(base if seen[base] == 1 else f'{base}#{seen[base]}')
    return keys


def align_events(events, data_dir, cfg, strict_day0=False):
    """Align every event against files in ``data_dir``.

    Returns (aligned, exclusions); an event that cannot be aligned is
    excluded with its error rather than aborting the run.
    """
    cache = {}

    def series(security_id):
        if security_id not in cache:
            try:
                cache[security_id] = load_price_file(data_dir, security_id)
            except DataError as exc:
                cache[security_id] = exc
        if isinstance(cache[security_id], DataError):
            raise cache[security_id]
        return cache[security_id]

    aligned, exclusions = [], []
    for key, event in zip(event_keys(events), events):
        try:
            aligned.append(align_event(
                event, series(event.security_id), series(event.market_id), cfg,
                strict_day0=strict_day0, key=key,
            ))
        except DataError as exc:
            logger.warning('Excluding %s: %s', key, exc)
            exclusions.append(Exclusion.from_error(key, exc))

    logger.info('Aligned %d of %d events', len(aligned), len(events))
    return aligned, exclusions
