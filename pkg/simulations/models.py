"""Configuration and output records of the synthetic leakage simulator."""
import math
from dataclasses import dataclass, field
from datetime import date
from types import MappingProxyType
from typing import Mapping, Optional

from eventstudy.exceptions import InvalidConfig
from ingest.models import WindowConfig

DEFAULT_BETA_RANGE = (0.5, 1.5)


@dataclass(frozen=True)
class LeakageProfile:
    """Abnormal drift added on days onset_day..-1 plus a jump on day 0."""

    onset_day: int = -16
    daily_drift: float = 0.004
    announcement_jump: float = 0.0

    def __post_init__(self):
        if self.onset_day >= 0:
            raise InvalidConfig(f'leakage onset must be before day 0, got {self.onset_day}')
        if not (math.isfinite(self.daily_drift) and math.isfinite(self.announcement_jump)):
            raise InvalidConfig('leakage drift and announcement jump must be finite')

    @classmethod
    def for_window(cls, windows, **values):
        """Profile whose default onset never precedes the event window start."""
        values.setdefault('onset_day', max(cls.onset_day, windows.evt_start))
        return cls(**values)

    def injected(self):
        """Abnormal return added on each event-day, zero days omitted."""
        days = {day: self.daily_drift for day in range(self.onset_day, 0) if self.daily_drift}
        if self.announcement_jump:
            days[0] = self.announcement_jump
        return days

    def as_dict(self):
        return {
            'onset_day': self.onset_day,
            'daily_drift': self.daily_drift,
            'announcement_jump': self.announcement_jump,
        }


@dataclass(frozen=True)
class SimConfig:
    n_events: int = 40
    seed: int = 0
    market_daily_vol: float = 0.01
    idio_vol: float = 0.02
    true_alpha: float = 0.0
    true_beta_range: tuple = DEFAULT_BETA_RANGE
    leakage: Optional[LeakageProfile] = None
    windows: WindowConfig = field(default_factory=WindowConfig)
    start_date: date = date(2015, 1, 5)
    event_spacing: int = 5
    market_id: str = 'MKT'

    def __post_init__(self):
        object.__setattr__(self, 'true_beta_range', tuple(float(b) for b in self.true_beta_range))
        errors = []
        if self.n_events < 2:
            errors.append(f'n_events must be >= 2, got {self.n_events}')
        if not 0 <= self.seed < 2 ** 64:
            errors.append(f'seed must be a 64-bit unsigned integer, got {self.seed}')
        for name in ('market_daily_vol', 'idio_vol'):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                errors.append(f'{name} must be > 0, got {value}')
        if not math.isfinite(self.true_alpha):
            errors.append('true_alpha must be finite')
        if len(self.true_beta_range) != 2:
            errors.append('true_beta_range must be a (low, high) pair')
        else:
            low, high = self.true_beta_range
            if not 0 < low <= high <= 4:
                errors.append(f'true_beta_range must lie within (0, 4], got {self.true_beta_range}')
        if self.event_spacing < 1:
            errors.append('event_spacing must be >= 1')
        if self.leakage is not None and self.leakage.onset_day < self.windows.evt_start:
            errors.append(f'leakage onset {self.leakage.onset_day} precedes the event window '
                          f'start {self.windows.evt_start}')
        if errors:
            raise InvalidConfig(f"Invalid SimConfig: {'; '.join(errors)}")

    @classmethod
    def from_options(cls, options):
        """Build from resolved ``simulate``/``power`` option values; None keeps the default."""
        values = {}
        for key, name in (('events', 'n_events'), ('seed', 'seed'), ('market_vol', 'market_daily_vol'),
                          ('idio_vol', 'idio_vol'), ('true_alpha', 'true_alpha'),
                          ('spacing', 'event_spacing'), ('market_id', 'market_id')):
            if options.get(key) is not None:
                values[name] = options[key]
        low, high = DEFAULT_BETA_RANGE
        values['true_beta_range'] = (
            options.get('beta_low') if options.get('beta_low') is not None else low,
            options.get('beta_high') if options.get('beta_high') is not None else high,
        )
        if options.get('start_date'):
            try:
                values['start_date'] = date.fromisoformat(str(options['start_date']))
            except ValueError as exc:
                raise InvalidConfig(f'bad start date: {exc}') from exc

        leak = {
            name: options.get(key)
            for key, name in (('leak_onset', 'onset_day'), ('leak_drift', 'daily_drift'),
                              ('leak_jump', 'announcement_jump'))
            if options.get(key) is not None
        }
        values['windows'] = WindowConfig.from_settings(
            est_start=options.get('est_start'),
            est_end=options.get('est_end'),
            evt_start=options.get('evt_start'),
            evt_end=options.get('evt_end'),
            min_estimation_days=options.get('min_estimation_days'),
        )
        if leak:
            values['leakage'] = LeakageProfile.for_window(values['windows'], **leak)
        return cls(**values)

    @property
    def calendar_length(self):
        """Trading days needed so every event has est_start-1..evt_end."""
        return self.day0_position(self.n_events - 1) + self.windows.evt_end + 1

    def day0_position(self, index):
        return 1 - self.windows.est_start + index * self.event_spacing

    def security_id(self, index):
        return f'S{index + 1:03d}'

    def label(self, index):
        return f'sim-{index + 1:03d}'

    def as_dict(self):
        return {
            'n_events': self.n_events,
            'seed': self.seed,
            'market_daily_vol': self.market_daily_vol,
            'idio_vol': self.idio_vol,
            'true_alpha': self.true_alpha,
            'true_beta_range': list(self.true_beta_range),
            'leakage': self.leakage.as_dict() if self.leakage else None,
            'windows': self.windows.as_dict(),
            'start_date': self.start_date.isoformat(),
            'event_spacing': self.event_spacing,
            'market_id': self.market_id,
        }


@dataclass(frozen=True)
class SimulatedPanel:
    """Generated price files, announcements and the ground truth behind them."""

    config: SimConfig
    market: object
    stocks: tuple
    events: tuple
    truth: Mapping[str, object]

    def __post_init__(self):
        object.__setattr__(self, 'stocks', tuple(self.stocks))
        object.__setattr__(self, 'events', tuple(self.events))
        object.__setattr__(self, 'truth', MappingProxyType(dict(self.truth)))


@dataclass(frozen=True)
class PowerCell:
    """Rejection rate of one (drift, n_events) grid cell."""

    daily_drift: float
    n_events: int
    replications: int
    rejections: int
    day_frequency: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'day_frequency', MappingProxyType(dict(sorted(self.day_frequency.items()))))

    @property
    def rejection_rate(self):
        return self.rejections / self.replications

    def as_dict(self):
        return {
            'daily_drift': self.daily_drift,
            'n_events': self.n_events,
            'replications': self.replications,
            'rejections': self.rejections,
            'rejection_rate': self.rejection_rate,
            'day_frequency': {str(day): freq for day, freq in self.day_frequency.items()},
        }
