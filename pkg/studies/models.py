from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Mapping, Optional

from django.conf import settings

from eventstudy.exceptions import InvalidConfig


class Decision(str, Enum):
    ACCEPT_H0 = 'accept_H0'
    REJECT_H0 = 'reject_H0'


@dataclass(frozen=True)
class DecisionPolicy:
    """Reject H0 only on ``min_run`` consecutive significant days in the run-up."""

    min_run: int = 3
    run_up_start: int = -10
    run_up_end: int = -1

    def __post_init__(self):
        if self.min_run < 1:
            raise InvalidConfig(f'min_run must be >= 1, got {self.min_run}')
        if self.run_up_start > self.run_up_end:
            raise InvalidConfig(
                f'run-up window [{self.run_up_start}, {self.run_up_end}] is empty'
            )

    @classmethod
    def from_settings(cls, **overrides):
        values = {
            'min_run': settings.EVENTSTUDY_MIN_RUN,
            'run_up_start': settings.EVENTSTUDY_RUN_UP_START,
            'run_up_end': settings.EVENTSTUDY_RUN_UP_END,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def as_dict(self):
        return {'min_run': self.min_run, 'run_up_start': self.run_up_start, 'run_up_end': self.run_up_end}


@dataclass(frozen=True)
class DayStat:
    """Cross-sectional statistics for one event-day.

    ``sigma`` is undefined below two events and ``t_stat`` whenever sigma is
    undefined or zero with a non-zero AAR.
    """

    event_day: int
    aar: Optional[float]
    sigma: Optional[float]
    n: int
    t_stat: Optional[float]
    p_value: Optional[float]
    significant: bool
    caar: float

    def as_dict(self):
        return {
            'event_day': self.event_day,
            'aar': self.aar,
            'sigma': self.sigma,
            'n': self.n,
            't_stat': self.t_stat,
            'p_value': self.p_value,
            'significant': self.significant,
            'caar': self.caar,
        }


@dataclass(frozen=True)
class RunUpProfile:
    """Shape of the pre-announcement part of the event window."""

    days: int
    positive_aar_days: int
    positive_aar_share: Optional[float]
    peak_caar: Optional[float]
    peak_caar_day: Optional[int]
    trough_caar: Optional[float]
    trough_caar_day: Optional[int]
    build_up: Optional[float]
    aar_dispersion: Optional[float]
    significant_days: tuple = ()

    def as_dict(self):
        return {
            'days': self.days,
            'positive_aar_days': self.positive_aar_days,
            'positive_aar_share': self.positive_aar_share,
            'peak_caar': self.peak_caar,
            'peak_caar_day': self.peak_caar_day,
            'trough_caar': self.trough_caar,
            'trough_caar_day': self.trough_caar_day,
            'build_up': self.build_up,
            'aar_dispersion': self.aar_dispersion,
            'significant_days': list(self.significant_days),
        }


@dataclass(frozen=True)
class EventStudyResult:
    stats: tuple
    significant_days: tuple
    reaction_fraction: Optional[float]
    hypothesis_decision: Decision
    alpha_level: float
    policy: DecisionPolicy = field(default_factory=DecisionPolicy)
    run_up: Optional[RunUpProfile] = None
    gaps: Mapping[str, tuple] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'stats', tuple(self.stats))
        days = {s.event_day for s in self.stats}
        stray = [d for d in self.significant_days if d not in days]
        if stray:
            raise ValueError(f'significant days outside the event window: {stray}')
        object.__setattr__(self, 'significant_days', tuple(sorted(self.significant_days)))
        object.__setattr__(self, 'gaps', MappingProxyType({k: tuple(v) for k, v in self.gaps.items() if v}))

    def stat(self, day):
        for s in self.stats:
            if s.event_day == day:
                return s
        raise KeyError(day)

    def caar_at(self, day):
        return self.stat(day).caar

    @property
    def event_days(self):
        return [s.event_day for s in self.stats]


@dataclass(frozen=True)
class StudyComparison:
    """Two independent study runs side by side (e.g. before/after a reform)."""

    first_label: str
    second_label: str
    first: Mapping[str, object]
    second: Mapping[str, object]
    deltas: Mapping[str, Optional[float]]
    dispersion_ratio: Optional[float]

    def as_dict(self):
        return {
            'first': {'label': self.first_label, **self.first},
            'second': {'label': self.second_label, **self.second},
            'deltas': dict(self.deltas),
            'dispersion_ratio': self.dispersion_ratio,
        }
