"""Monte-Carlo rejection rates of the hypothesis decision over a grid of designs."""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

from django.conf import settings

from eventstudy.exceptions import InvalidConfig
from market_model.estimation import build_panel
from studies.models import Decision
from studies.statistics import analyze

from .generator import simulate_events
from .models import LeakageProfile, PowerCell

logger = logging.getLogger(__name__)


def cell_config(base, daily_drift, n_events):
    """``base`` with the cell's event count and leakage drift."""
    if base.leakage is None:
        leakage = LeakageProfile.for_window(base.windows, daily_drift=daily_drift)
    else:
        leakage = replace(base.leakage, daily_drift=daily_drift)
    return replace(base, n_events=n_events, leakage=leakage)


def run_replication(cfg, replication, alpha_level=None, policy=None):
    """One simulated study; replication r draws from root [seed, r]."""
    events = simulate_events(cfg, root=[cfg.seed, replication])
    _, panel = build_panel(events, cfg.windows, threads=1)
    return analyze(panel, alpha_level=alpha_level, policy=policy)


def power_study(grid, replications, base, alpha_level=None, policy=None, threads=None):
    """Rejection rate of ``decide_hypothesis`` for every (daily_drift, n_events) cell.

    Replication seeds depend only on (base.seed, replication index), so the
    table does not change with ``threads``.
    """
    if replications < 1:
        raise InvalidConfig(f'replications must be >= 1, got {replications}')
    grid = [(float(drift), int(n)) for drift, n in grid]
    if not grid:
        raise InvalidConfig('power grid is empty')
    threads = threads or settings.EVENTSTUDY_THREADS

    cells = []
    for drift, n_events in grid:
        cfg = cell_config(base, drift, n_events)

        def replicate(r, cfg=cfg):
            return run_replication(cfg, r, alpha_level=alpha_level, policy=policy)

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(replicate, range(replications)))
        else:
            results = [replicate(r) for r in range(replications)]

        rejections = sum(1 for result in results if result.hypothesis_decision == Decision.REJECT_H0)
        days = results[0].event_days
        frequency = {
            day: sum(1 for result in results if day in result.significant_days) / replications
            for day in days
        }
        cell = PowerCell(
            daily_drift=drift,
            n_events=n_events,
            replications=replications,
            rejections=rejections,
            day_frequency=frequency,
        )
        logger.info('Power cell drift=%g n=%d: %d/%d rejections',
                    drift, n_events, rejections, replications)
        cells.append(cell)
    return cells
