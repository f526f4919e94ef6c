"""Cross-sectional aggregation and testing of an AbnormalReturnPanel."""
import logging
import math
from dataclasses import replace

import numpy as np
from django.conf import settings

from eventstudy.exceptions import (
    InsufficientCrossSection, NoData, UndefinedFraction, UnknownEvent, ZeroDispersion,
)

from .distributions import critical_value, two_sided_p_value
from .models import Decision, DecisionPolicy, DayStat, EventStudyResult, RunUpProfile, StudyComparison

logger = logging.getLogger(__name__)


def _check_day(panel, t):
    if t not in panel.n_t:
        raise NoData(f'day {t} is outside the event window {panel.event_days[0]}..{panel.event_days[-1]}')


def aar(panel, t):
    """Average abnormal return on day t over the events with data that day."""
    _check_day(panel, t)
    values = panel.values_at(t)
    if values.size == 0:
        raise NoData(f'no abnormal returns on day {t}')
    return float(values.mean()), int(values.size)


def cross_sectional_sigma(panel, t):
    """Sample standard deviation (divisor N-1) of the abnormal returns on day t."""
    _check_day(panel, t)
    values = panel.values_at(t)
    if values.size < 2:
        raise InsufficientCrossSection(f'day {t}: {values.size} events, need at least 2')
    if np.all(values == values[0]):
        return 0.0
    return float(values.std(ddof=1))


def t_stat(aar_value, sigma, n):
    """sqrt(n) * AAR / sigma; zero AAR with zero dispersion is t = 0."""
    if n < 2:
        raise InsufficientCrossSection(f'{n} events, need at least 2')
    if sigma < 0:
        raise ValueError(f'sigma must be non-negative, got {sigma}')
    if sigma == 0:
        if aar_value == 0:
            return 0.0
        raise ZeroDispersion(f'AAR {aar_value} with zero cross-sectional dispersion')
    return math.sqrt(n) * aar_value / sigma


def car(panel, event_key, t):
    """Running sum of one event's abnormal returns from evt_start through t.

    Days without data contribute zero; they are listed in ``panel.gaps``.
    """
    if event_key not in panel.per_event:
        raise UnknownEvent(f'no event {event_key!r} in the panel')
    _check_day(panel, t)
    values = panel.per_event[event_key]
    return float(sum(values.get(day, 0.0) for day in panel.event_days if day <= t))


def caar(panel, t):
    """Cross-sectional mean of CAR_j(t) over the events in the panel."""
    _check_day(panel, t)
    if panel.n_t[t] == 0:
        raise NoData(f'no abnormal returns on day {t}')
    return float(np.mean([car(panel, key, t) for key in panel.per_event]))


def _caar_path(panel):
    matrix = np.array(
        [[values.get(day, 0.0) for day in panel.event_days] for values in panel.per_event.values()],
        dtype=np.float64,
    )
    return np.cumsum(matrix, axis=1).mean(axis=0)


def day_stats(panel):
    """Unflagged DayStat for every event-day, ordered evt_start..evt_end."""
    stats = []
    for day, caar_value in zip(panel.event_days, _caar_path(panel)):
        n = panel.n_t[day]
        mean = sigma = t = p = None
        if n >= 1:
            mean, _ = aar(panel, day)
        if n >= 2:
            sigma = cross_sectional_sigma(panel, day)
            try:
                t = t_stat(mean, sigma, n)
                p = two_sided_p_value(t, n - 1)
            except ZeroDispersion:
                logger.warning('Day %d: zero cross-sectional dispersion, t-statistic undefined', day)
        stats.append(DayStat(
            event_day=day, aar=mean, sigma=sigma, n=n,
            t_stat=t, p_value=p, significant=False, caar=float(caar_value),
        ))
    return stats


def significance_scan(stats, alpha_level, df=None):
    """Event-days whose two-sided t-test rejects at ``alpha_level``.

    ``df`` fixes the degrees of freedom for every day; by default each day
    uses its own N_t - 1.
    """
    if df is not None and df < 1:
        raise ValueError(f'degrees of freedom must be >= 1, got {df}')
    days = []
    for stat in stats:
        if stat.t_stat is None:
            continue
        if abs(stat.t_stat) >= critical_value(alpha_level, df or stat.n - 1):
            days.append(stat.event_day)
    return sorted(days)


def _longest_run(days):
    longest = current = 0
    previous = None
    for day in sorted(set(days)):
        current = current + 1 if previous is not None and day == previous + 1 else 1
        longest = max(longest, current)
        previous = day
    return longest


def decide_hypothesis(significant_days, policy=None):
    """Reject H0 only on a run of consecutive significant run-up days.

    Isolated significant days, however early, do not establish leakage.
    """
    policy = policy or DecisionPolicy()
    run_up = [d for d in significant_days if policy.run_up_start <= d <= policy.run_up_end]
    if _longest_run(run_up) >= policy.min_run:
        return Decision.REJECT_H0
    return Decision.ACCEPT_H0


def _caar(stats, day):
    for stat in stats:
        if stat.event_day == day:
            return stat.caar
    raise UndefinedFraction(f'day {day} is not in the event window')


def caar_fraction(stats, day):
    """CAAR(day) / CAAR(0): share of the announcement reaction reached by ``day``."""
    base = _caar(stats, 0)
    if base == 0:
        raise UndefinedFraction('CAAR on the announcement day is zero')
    return _caar(stats, day) / base


def reaction_fraction(stats):
    return caar_fraction(stats, -1)


def format_percent(fraction):
    return f'{fraction * 100:.1f}%'


def run_up_profile(stats):
    """Shape of the pre-announcement CAAR path; reads the ``significant`` flags."""
    pre = [s for s in stats if s.event_day < 0]
    with_aar = [s for s in pre if s.aar is not None]
    positive = sum(1 for s in with_aar if s.aar > 0)
    if not pre:
        return RunUpProfile(0, 0, None, None, None, None, None, None, None, ())

    peak = max(pre, key=lambda s: s.caar)
    trough = min(pre, key=lambda s: s.caar)
    aars = np.array([s.aar for s in with_aar], dtype=np.float64)
    return RunUpProfile(
        days=len(pre),
        positive_aar_days=positive,
        positive_aar_share=positive / len(with_aar) if with_aar else None,
        peak_caar=peak.caar,
        peak_caar_day=peak.event_day,
        trough_caar=trough.caar,
        trough_caar_day=trough.event_day,
        build_up=pre[-1].caar - trough.caar,
        aar_dispersion=float(aars.std(ddof=1)) if aars.size >= 2 else None,
        significant_days=tuple(s.event_day for s in pre if s.significant),
    )


def analyze(panel, alpha_level=None, policy=None):
    """Day statistics, significance scan, reaction fraction and decision."""
    alpha_level = settings.EVENTSTUDY_ALPHA if alpha_level is None else alpha_level
    policy = policy or DecisionPolicy.from_settings()

    stats = day_stats(panel)
    significant = significance_scan(stats, alpha_level)
    flagged = set(significant)
    stats = [replace(s, significant=s.event_day in flagged) for s in stats]

    try:
        fraction = reaction_fraction(stats)
    except UndefinedFraction as exc:
        logger.warning('Reaction fraction undefined: %s', exc)
        fraction = None

    decision = decide_hypothesis(significant, policy)
    logger.info('Significant days %s at alpha=%s: %s', significant, alpha_level, decision.value)
    return EventStudyResult(
        stats=stats,
        significant_days=significant,
        reaction_fraction=fraction,
        hypothesis_decision=decision,
        alpha_level=alpha_level,
        policy=policy,
        run_up=run_up_profile(stats),
        gaps=panel.gaps,
    )


def _summary(result):
    def caar_or_none(day):
        try:
            return result.caar_at(day)
        except KeyError:
            return None

    run_up = result.run_up or run_up_profile(result.stats)
    return {
        'caar_day0': caar_or_none(0),
        'caar_day_minus1': caar_or_none(-1),
        'reaction_fraction': result.reaction_fraction,
        'significant_pre_days': len(run_up.significant_days),
        'positive_aar_share': run_up.positive_aar_share,
        'aar_dispersion': run_up.aar_dispersion,
        'hypothesis_decision': result.hypothesis_decision.value,
    }


def compare_studies(first, second, first_label='first', second_label='second'):
    """Side-by-side metrics of two runs; deltas are second minus first."""
    a, b = _summary(first), _summary(second)
    deltas = {
        key: (b[key] - a[key]) if a[key] is not None and b[key] is not None else None
        for key in ('caar_day0', 'caar_day_minus1', 'reaction_fraction',
                    'significant_pre_days', 'positive_aar_share', 'aar_dispersion')
    }
    ratio = None
    if a['aar_dispersion'] and b['aar_dispersion'] is not None:
        ratio = b['aar_dispersion'] / a['aar_dispersion']
    return StudyComparison(
        first_label=first_label,
        second_label=second_label,
        first=a,
        second=b,
        deltas=deltas,
        dispersion_ratio=ratio,
    )
