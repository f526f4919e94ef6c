"""Value objects for price files, announcements and event-time alignment.

Nothing here is persisted; these are immutable dataclasses shared between apps.
"""
import math
from dataclasses import dataclass, field
from datetime import date
from types import MappingProxyType
from typing import Mapping, Optional

from django.conf import settings

from eventstudy.exceptions import InvalidConfig


@dataclass(frozen=True)
class PriceSeries:
    """Dated adjusted closes for one security or market index."""

    security_id: str
    observations: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, 'observations', tuple(
            (d, float(p)) for d, p in self.observations
        ))
        previous = None
        for d, price in self.observations:
            if previous is not None and d <= previous:
                raise ValueError(f'{self.security_id}: dates must be strictly increasing ({d} after {previous})')
            if not math.isfinite(price) or price <= 0:
                raise ValueError(f'{self.security_id}: price on {d} must be positive and finite')
            previous = d

    def __len__(self):
        return len(self.observations)

    @property
    def dates(self):
        return [d for d, _ in self.observations]

    @property
    def prices(self):
        return [p for _, p in self.observations]

    def between(self, first, last):
        """Sub-series with first <= date <= last."""
        return PriceSeries(
            self.security_id,
            tuple((d, p) for d, p in self.observations if first <= d <= last),
        )


@dataclass(frozen=True)
class EventSpec:
    """One announcement; day 0 of its event time."""

    security_id: str
    market_id: str
    announcement_date: date
    label: str = ''

    @property
    def default_label(self):
        return f'{self.security_id}:{self.announcement_date.isoformat()}'


@dataclass(frozen=True)
class WindowConfig:
    """Estimation and event windows in trading-day offsets from day 0.

    The CAR summation bounds of the cumulative measures map onto these
    fields as T1 = evt_start - 1 and T2 = the queried day.
    """

    est_start: int = -89
    est_end: int = -31
    evt_start: int = -30
    evt_end: int = 10
    min_estimation_days: int = 30

    def __post_init__(self):
        errors = []
        if not self.est_start < self.est_end:
            errors.append(f'est_start ({self.est_start}) must be < est_end ({self.est_end})')
        if not self.est_end < self.evt_start:
            errors.append(f'estimation window must end before the event window starts '
                          f'(est_end={self.est_end}, evt_start={self.evt_start})')
        if not self.evt_start <= 0 <= self.evt_end:
            errors.append(f'event window [{self.evt_start}, {self.evt_end}] must contain day 0')
        if self.min_estimation_days < 3:
            errors.append('min_estimation_days must be >= 3')
        if self.estimation_length < self.min_estimation_days:
            errors.append(f'estimation window has {self.estimation_length} days, '
                          f'fewer than the floor of {self.min_estimation_days}')
        if errors:
            raise InvalidConfig(f"Invalid WindowConfig: {'; '.join(errors)}")

    @classmethod
    def from_settings(cls, **overrides):
        values = {
            'est_start': settings.EVENTSTUDY_EST_START,
            'est_end': settings.EVENTSTUDY_EST_END,
            'evt_start': settings.EVENTSTUDY_EVT_START,
            'evt_end': settings.EVENTSTUDY_EVT_END,
            'min_estimation_days': settings.EVENTSTUDY_MIN_ESTIMATION_DAYS,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @property
    def estimation_length(self):
        return self.est_end - self.est_start + 1

    @property
    def estimation_days(self):
        return range(self.est_start, self.est_end + 1)

    @property
    def event_days(self):
        return range(self.evt_start, self.evt_end + 1)

    @property
    def span(self):
        """Every event-day that can carry a return."""
        return range(self.est_start, self.evt_end + 1)

    def as_dict(self):
        return {
            'est_start': self.est_start,
            'est_end': self.est_end,
            'evt_start': self.evt_start,
            'evt_end': self.evt_end,
            'min_estimation_days': self.min_estimation_days,
        }


@dataclass(frozen=True)
class Exclusion:
    """An event dropped from the study, with the reason it was dropped."""

    event_key: str
    reason: str
    message: str

    @classmethod
    def from_error(cls, event_key, error):
        return cls(event_key=event_key, reason=type(error).__name__, message=str(error))

    def as_dict(self):
        return {'event': self.event_key, 'reason': self.reason, 'message': self.message}


@dataclass(frozen=True)
class AlignedEvent:
    """Paired stock/market returns keyed by event-day.

    ``coverage`` holds the event-days where both returns exist; both return
    maps are restricted to it.
    """

    event: EventSpec
    key: str
    stock_returns: Mapping[int, float]
    market_returns: Mapping[int, float]
    day0_date: Optional[date] = None
    dates: Mapping[int, date] = field(default_factory=dict)
    coverage: frozenset = field(init=False)

    def __post_init__(self):
        if set(self.stock_returns) != set(self.market_returns):
            raise ValueError(f'{self.key}: stock and market returns must share event-days')
        object.__setattr__(self, 'stock_returns', MappingProxyType(dict(sorted(self.stock_returns.items()))))
        object.__setattr__(self, 'market_returns', MappingProxyType(dict(sorted(self.market_returns.items()))))
        object.__setattr__(self, 'dates', MappingProxyType(dict(self.dates)))
        object.__setattr__(self, 'coverage', frozenset(self.stock_returns))

    def paired(self, days):
        """(stock, market) return lists over the covered subset of ``days``."""
        covered = [d for d in days if d in self.coverage]
        return (
            [self.stock_returns[d] for d in covered],
            [self.market_returns[d] for d in covered],
            covered,
        )
