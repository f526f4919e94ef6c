"""Student-t tail probabilities via the regularized incomplete beta function."""
import math
from functools import lru_cache

from scipy.optimize import brentq
from scipy.special import betainc


def t_cdf(t, df):
    """P(T <= t) for T ~ Student-t(df)."""
    if df < 1:
        raise ValueError(f'degrees of freedom must be >= 1, got {df}')
    if math.isinf(t):
        return 0.0 if t < 0 else 1.0
    lower = 0.5 * float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return 1.0 - lower if t > 0 else lower


def two_sided_p_value(t, df):
    """P(|T| >= |t|) for T ~ Student-t(df)."""
    # Lower tail only; 1 - cdf would lose the small p-values
    return 2.0 * t_cdf(-abs(t), df)


@lru_cache(maxsize=256)
def critical_value(alpha_level, df):
    """Two-sided critical value t* with P(|T| >= t*) = alpha_level."""
    if df < 1:
        raise ValueError(f'degrees of freedom must be >= 1, got {df}')
    if alpha_level >= 1.0:
        return 0.0
    if alpha_level <= 0.0:
        return math.inf

    def excess(t):
        return two_sided_p_value(t, df) - alpha_level

    upper = 1.0
    while excess(upper) > 0:
        upper *= 2.0
    return brentq(excess, 0.0, upper, xtol=1e-14, rtol=1e-15, maxiter=500)
