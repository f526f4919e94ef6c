from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Mapping, Optional

from django.conf import settings

from eventstudy import __version__
from eventstudy.exceptions import InvalidConfig
from ingest.models import Exclusion, WindowConfig
from market_model.models import MarketModelFit
from studies.models import Decision, DecisionPolicy, DayStat, RunUpProfile


@dataclass(frozen=True)
class StudyConfig:
    """Everything one ``study`` run needs."""

    data_dir: Path
    events_file: Path
    output_dir: Path
    windows: WindowConfig = field(default_factory=WindowConfig)
    alpha_level: float = 0.05
    policy: DecisionPolicy = field(default_factory=DecisionPolicy)
    strict_day0: bool = False
    threads: int = 1
    fixed_clock: Optional[str] = None

    def __post_init__(self):
        for name in ('data_dir', 'events_file', 'output_dir'):
            object.__setattr__(self, name, Path(getattr(self, name)))
        if not 0 < self.alpha_level <= 1:
            raise InvalidConfig(f'alpha must be in (0, 1], got {self.alpha_level}')
        if self.threads < 1:
            raise InvalidConfig(f'threads must be >= 1, got {self.threads}')

    @classmethod
    def from_options(cls, options):
        """Build from resolved option values; None falls back to settings."""
        missing = [name for name in ('data_dir', 'events', 'out') if not options.get(name)]
        if missing:
            raise InvalidConfig(f"missing required option(s): {', '.join('--' + m.replace('_', '-') for m in missing)}")

        def pick(name, default):
            value = options.get(name)
            return default if value is None else value

        return cls(
            data_dir=options['data_dir'],
            events_file=options['events'],
            output_dir=options['out'],
            windows=WindowConfig.from_settings(
                est_start=options.get('est_start'),
                est_end=options.get('est_end'),
                evt_start=options.get('evt_start'),
                evt_end=options.get('evt_end'),
                min_estimation_days=options.get('min_estimation_days'),
            ),
            alpha_level=pick('alpha', settings.EVENTSTUDY_ALPHA),
            policy=DecisionPolicy.from_settings(
                min_run=options.get('min_run'),
                run_up_start=options.get('run_up_start'),
                run_up_end=options.get('run_up_end'),
            ),
            strict_day0=pick('strict_day0', settings.EVENTSTUDY_STRICT_DAY0),
            threads=max(pick('threads', settings.EVENTSTUDY_THREADS), 1),
            fixed_clock=options.get('fixed_clock'),
        )

    def validate(self):
        """Paths must resolve when the run starts."""
        if not self.data_dir.is_dir():
            raise InvalidConfig(f'data directory not found: {self.data_dir}')
        if not self.events_file.is_file():
            raise InvalidConfig(f'events file not found: {self.events_file}')
        if self.output_dir.exists() and not self.output_dir.is_dir():
            raise InvalidConfig(f'output path is not a directory: {self.output_dir}')

    def as_dict(self):
        return {
            'data_dir': str(self.data_dir),
            'events_file': str(self.events_file),
            'windows': self.windows.as_dict(),
            'alpha_level': self.alpha_level,
            'decision_policy': self.policy.as_dict(),
            'strict_day0': self.strict_day0,
        }


@dataclass(frozen=True)
class Report:
    """The per-day table plus everything needed to audit how it was produced."""

    day_stats: tuple
    significant_days: tuple
    reaction_fraction: Optional[float]
    hypothesis_decision: Decision
    events: tuple
    excluded: tuple
    fits: tuple
    run_up: Optional[RunUpProfile]
    gaps: Mapping[str, tuple]
    config: Mapping[str, object]
    generated_at: str
    version: str = __version__

    def __post_init__(self):
        days = [s.event_day for s in self.day_stats]
        if not days or days != list(range(days[0], days[-1] + 1)):
            raise ValueError('day_stats must cover a contiguous event window in order')
        for name in ('day_stats', 'significant_days', 'events', 'excluded', 'fits'):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, 'gaps', MappingProxyType({k: tuple(v) for k, v in self.gaps.items()}))
        object.__setattr__(self, 'config', MappingProxyType(dict(self.config)))

    @classmethod
    def from_result(cls, result, events, excluded, fits, config, generated_at):
        return cls(
            day_stats=result.stats,
            significant_days=result.significant_days,
            reaction_fraction=result.reaction_fraction,
            hypothesis_decision=result.hypothesis_decision,
            events=events,
            excluded=excluded,
            fits=fits,
            run_up=result.run_up,
            gaps=result.gaps,
            config=config,
            generated_at=generated_at,
        )

    @property
    def stats(self):
        return self.day_stats

    @property
    def event_window(self):
        return self.day_stats[0].event_day, self.day_stats[-1].event_day

    def caar_at(self, day):
        for stat in self.day_stats:
            if stat.event_day == day:
                return stat.caar
        raise KeyError(day)

    def to_dict(self):
        return {
            'version': self.version,
            'generated_at': self.generated_at,
            'config': dict(self.config),
            'events': list(self.events),
            'excluded': [e.as_dict() for e in self.excluded],
            'fits': [f.as_dict() for f in self.fits],
            'gaps': {key: list(days) for key, days in self.gaps.items()},
            'day_stats': [s.as_dict() for s in self.day_stats],
            'significant_days': list(self.significant_days),
            'reaction_fraction': self.reaction_fraction,
            'hypothesis_decision': self.hypothesis_decision.value,
            'run_up': self.run_up.as_dict() if self.run_up else None,
        }

    @classmethod
    def from_dict(cls, data):
        run_up = data.get('run_up')
        if run_up is not None:
            run_up = RunUpProfile(**{**run_up, 'significant_days': tuple(run_up['significant_days'])})
        return cls(
            day_stats=[DayStat(**row) for row in data['day_stats']],
            significant_days=data['significant_days'],
            reaction_fraction=data['reaction_fraction'],
            hypothesis_decision=Decision(data['hypothesis_decision']),
            events=data['events'],
            excluded=[Exclusion(e['event'], e['reason'], e['message']) for e in data['excluded']],
            fits=[
                MarketModelFit(
                    alpha=f['alpha'],
                    beta=f['beta'],
                    n_obs=f['n_obs'],
                    residual_variance=f['residual_variance'],
                    r_squared=f['r_squared'],
                    event_key=f['event'],
                )
                for f in data['fits']
            ],
            run_up=run_up,
            gaps=data.get('gaps', {}),
            config=data.get('config', {}),
            generated_at=data['generated_at'],
            version=data.get('version', __version__),
        )
