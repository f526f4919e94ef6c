"""Synthetic market/stock panels with known market-model parameters.

Returns are drawn first and prices integrated from P0 = 100, so every
injected abnormal return is exact. Randomness comes from NumPy's PCG64
seeded with ``SeedSequence(root + [stream])``: stream 0 drives the market
index, stream i + 1 drives event i. ``root`` is ``[seed]`` for a single
panel and ``[seed, replication]`` inside a power study.
"""
import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from ingest.models import AlignedEvent, EventSpec, PriceSeries
from ingest.parsers import format_event_csv, format_price_csv

from .models import SimulatedPanel

logger = logging.getLogger(__name__)

INITIAL_PRICE = 100.0


def _rng(root, stream):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(root) + [stream])))


def trading_calendar(cfg):
    return [ts.date() for ts in pd.bdate_range(start=cfg.start_date, periods=cfg.calendar_length)]


def draw_returns(cfg, root=None):
    """Market returns and one stock return path per event.

    Element k of each array is the return from trading day k-1 to k of the
    calendar (k >= 1; element 0 is unused and zero).
    """
    root = [cfg.seed] if root is None else list(root)
    length = cfg.calendar_length
    market = np.zeros(length)
    market[1:] = _rng(root, 0).normal(0.0, cfg.market_daily_vol, length - 1)

    injected = cfg.leakage.injected() if cfg.leakage else {}
    low, high = cfg.true_beta_range
    stocks = []
    for index in range(cfg.n_events):
        rng = _rng(root, index + 1)
        beta = float(rng.uniform(low, high))
        returns = np.zeros(length)
        returns[1:] = cfg.true_alpha + beta * market[1:] + rng.normal(0.0, cfg.idio_vol, length - 1)
        day0 = cfg.day0_position(index)
        for day, amount in injected.items():
            returns[day0 + day] += amount
        stocks.append({
            'index': index,
            'alpha': cfg.true_alpha,
            'beta': beta,
            'returns': returns,
            'injected': injected,
        })
    return market, stocks


def _integrate(security_id, calendar, returns):
    prices = INITIAL_PRICE * np.cumprod(1.0 + returns)
    return PriceSeries(security_id, tuple(zip(calendar, prices.tolist())))


def _truth(cfg, calendar, stocks):
    return {
        'seed': cfg.seed,
        'config': cfg.as_dict(),
        'market_id': cfg.market_id,
        'events': [
            {
                'label': cfg.label(s['index']),
                'security_id': cfg.security_id(s['index']),
                'announcement_date': calendar[cfg.day0_position(s['index'])].isoformat(),
                'alpha': s['alpha'],
                'beta': s['beta'],
                'injected_abnormal_returns': {str(day): value for day, value in s['injected'].items()},
            }
            for s in stocks
        ],
    }


def simulate_panel(cfg):
    """Price files, events and ground truth for one synthetic study."""
    calendar = trading_calendar(cfg)
    market, stocks = draw_returns(cfg)
    events = [
        EventSpec(
            security_id=cfg.security_id(s['index']),
            market_id=cfg.market_id,
            announcement_date=calendar[cfg.day0_position(s['index'])],
            label=cfg.label(s['index']),
        )
        for s in stocks
    ]
    panel = SimulatedPanel(
        config=cfg,
        market=_integrate(cfg.market_id, calendar, market),
        stocks=[_integrate(cfg.security_id(s['index']), calendar, s['returns']) for s in stocks],
        events=events,
        truth=_truth(cfg, calendar, stocks),
    )
    logger.info('Simulated %d events over %d trading days (seed %d)', cfg.n_events, len(calendar), cfg.seed)
    return panel


def simulate_events(cfg, root=None):
    """AlignedEvents built straight from the drawn returns, no files involved."""
    calendar = trading_calendar(cfg)
    market, stocks = draw_returns(cfg, root)
    days = cfg.windows.span
    aligned = []
    for s in stocks:
        day0 = cfg.day0_position(s['index'])
        aligned.append(AlignedEvent(
            event=EventSpec(
                security_id=cfg.security_id(s['index']),
                market_id=cfg.market_id,
                announcement_date=calendar[day0],
                label=cfg.label(s['index']),
            ),
            key=cfg.label(s['index']),
            stock_returns={day: float(s['returns'][day0 + day]) for day in days},
            market_returns={day: float(market[day0 + day]) for day in days},
            day0_date=calendar[day0],
            dates={day: calendar[day0 + day] for day in days},
        ))
    return aligned


def write_panel(panel, out_dir):
    """Write ``<security_id>.csv`` per series, ``events.csv`` and ``truth.json``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for series in (panel.market, *panel.stocks):
        path = out_dir / f'{series.security_id}.csv'
        path.write_bytes(format_price_csv(series).encode('utf-8'))
        written.append(path)

    events_path = out_dir / 'events.csv'
    events_path.write_bytes(format_event_csv(panel.events).encode('utf-8'))
    truth_path = out_dir / 'truth.json'
    truth_path.write_bytes((json.dumps(dict(panel.truth), indent=2, sort_keys=True) + '\n').encode('utf-8'))
    written.extend([events_path, truth_path])
    logger.info('Wrote %d files to %s', len(written), out_dir)
    return written
