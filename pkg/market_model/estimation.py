"""Market model R_j = alpha + beta * R_m + e, fitted per event by OLS."""
import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from django.conf import settings

from eventstudy.exceptions import DegenerateRegressor, NoUsableEvents, TooFewObservations
from ingest.models import Exclusion

from .models import AbnormalReturnPanel, MarketModelFit

logger = logging.getLogger(__name__)

MIN_OBSERVATIONS = 30


def ols_fit(stock_rets, market_rets, min_obs=MIN_OBSERVATIONS, event_key=''):
    """Closed-form least squares on centered data (two-pass means)."""
    y = np.asarray(stock_rets, dtype=np.float64)
    x = np.asarray(market_rets, dtype=np.float64)
    if y.shape != x.shape:
        raise ValueError(f'paired series differ in length: {y.size} vs {x.size}')
    n = x.size
    if n < max(min_obs, 3):
        raise TooFewObservations(f'{event_key or "fit"}: {n} paired observations, need {max(min_obs, 3)}')
    if np.all(x == x[0]):
        raise DegenerateRegressor(f'{event_key or "fit"}: market returns have zero variance')

    x_mean = x.mean()
    y_mean = y.mean()
    dx = x - x_mean
    dy = y - y_mean
    beta = float(dx @ dy / (dx @ dx))
    alpha = float(y_mean - beta * x_mean)

    residuals = y - alpha - beta * x
    ssr = float(residuals @ residuals)
    sst = float(dy @ dy)
    r_squared = min(max(1.0 - ssr / sst, 0.0), 1.0) if sst > 0 else 0.0

    return MarketModelFit(
        alpha=alpha,
        beta=beta,
        n_obs=int(n),
        residual_variance=ssr / (n - 2),
        r_squared=r_squared,
        event_key=event_key,
    )


def abnormal_return(fit, r_stock, r_market):
    return r_stock - fit.expected_return(r_market)


def fit_event(aligned, cfg):
    """Fit on the estimation-window days of one aligned event only."""
    stock, market, _ = aligned.paired(cfg.estimation_days)
    return ols_fit(stock, market, min_obs=cfg.min_estimation_days, event_key=aligned.key)


def _event_row(aligned, cfg):
    fit = fit_event(aligned, cfg)
    row = {
        day: abnormal_return(fit, aligned.stock_returns[day], aligned.market_returns[day])
        for day in cfg.event_days
        if day in aligned.coverage
    }
    logger.debug('%s: alpha=%.6g beta=%.6g r2=%.4f n=%d',
                 aligned.key, fit.alpha, fit.beta, fit.r_squared, fit.n_obs)
    return fit, row


def build_panel(events, cfg, exclusions=(), threads=None):
    """Fit every event and collect abnormal returns over the event window.

    Returns (fits, panel) where ``fits`` maps event key to MarketModelFit in
    input order. Events whose fit fails are listed in ``panel.excluded``
    together with any ``exclusions`` passed in from earlier stages.
    """
    threads = threads or settings.EVENTSTUDY_THREADS
    events = list(events)

    def attempt(aligned):
        try:
            return _event_row(aligned, cfg)
        except (DegenerateRegressor, TooFewObservations) as exc:
            return exc

    if threads > 1 and len(events) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(attempt, events))
    else:
        outcomes = [attempt(aligned) for aligned in events]

    fits, rows, excluded = {}, {}, list(exclusions)
    for aligned, outcome in zip(events, outcomes):
        if isinstance(outcome, Exception):
            logger.warning('Excluding %s: %s', aligned.key, outcome)
            excluded.append(Exclusion.from_error(aligned.key, outcome))
            continue
        fits[aligned.key], rows[aligned.key] = outcome

    if not rows:
        raise NoUsableEvents(f'all {len(events)} events were excluded')

    panel = AbnormalReturnPanel(event_days=tuple(cfg.event_days), per_event=rows, excluded=excluded)
    logger.info('Built panel: %d events x %d event-days, %d excluded',
                panel.total_events, len(panel.event_days), len(excluded))
    if not panel.is_complete():
        logger.info('Panel has event-days without data for %d event(s)',
                    sum(1 for days in panel.gaps.values() if days))
    return fits, panel
