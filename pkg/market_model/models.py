from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np


@dataclass(frozen=True)
class MarketModelFit:
    """One (alpha, beta) per event, estimated over the estimation window."""

    alpha: float
    beta: float
    n_obs: int
    residual_variance: float
    r_squared: float
    event_key: str = ''

    def expected_return(self, r_market):
        return self.beta * r_market + self.alpha

    def as_dict(self):
        return {
            'event': self.event_key,
            'alpha': self.alpha,
            'beta': self.beta,
            'n_obs': self.n_obs,
            'residual_variance': self.residual_variance,
            'r_squared': self.r_squared,
        }


@dataclass(frozen=True)
class AbnormalReturnPanel:
    """Abnormal returns E_jt for every event over the event window.

    ``per_event`` preserves event input order. ``gaps`` lists, per event,
    the event-window days without data; ``excluded`` the events that never
    made it into the panel.
    """

    event_days: tuple
    per_event: Mapping[str, Mapping[int, float]]
    gaps: Mapping[str, tuple] = field(default_factory=dict)
    excluded: tuple = ()
    n_t: Mapping[int, int] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, 'event_days', tuple(self.event_days))
        per_event = {}
        for key, values in self.per_event.items():
            stray = set(values) - set(self.event_days)
            if stray:
                raise ValueError(f'{key}: abnormal returns outside the event window: {sorted(stray)}')
            if not all(np.isfinite(v) for v in values.values()):
                raise ValueError(f'{key}: abnormal returns must be finite')
            per_event[key] = MappingProxyType(dict(sorted(values.items())))
        object.__setattr__(self, 'per_event', MappingProxyType(per_event))
        gaps = {
            key: tuple(self.gaps.get(key, tuple(d for d in self.event_days if d not in values)))
            for key, values in per_event.items()
        }
        object.__setattr__(self, 'gaps', MappingProxyType(gaps))
        object.__setattr__(self, 'excluded', tuple(self.excluded))
        object.__setattr__(self, 'n_t', MappingProxyType({
            day: sum(1 for values in per_event.values() if day in values)
            for day in self.event_days
        }))

    @property
    def events(self):
        return list(self.per_event)

    @property
    def total_events(self):
        return len(self.per_event)

    def values_at(self, day):
        """Abnormal returns of the events with data on ``day``, in event order."""
        return np.array(
            [values[day] for values in self.per_event.values() if day in values],
            dtype=np.float64,
        )

    def is_complete(self):
        return all(n == self.total_events for n in self.n_t.values())
