import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ReturnSeries:
    """Simple one-day returns, each dated at the later of its two prices."""

    security_id: str
    observations: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, 'observations', tuple(
            (d, float(r)) for d, r in self.observations
        ))
        for d, ret in self.observations:
            if not math.isfinite(ret) or ret <= -1.0:
                raise ValueError(f'{self.security_id}: return on {d} must be finite and > -1')

    def __len__(self):
        return len(self.observations)

    @property
    def dates(self):
        return [d for d, _ in self.observations]

    @property
    def values(self):
        return [r for _, r in self.observations]

    def as_dict(self):
        return dict(self.observations)
