import numpy as np

from eventstudy.exceptions import TooShort

from .models import ReturnSeries


def simple_returns(prices):
    """Arithmetic returns (P_i - P_{i-1}) / P_{i-1} of a PriceSeries.

    Adjusted closes already carry dividends, so no reinvestment term is added.
    """
    if len(prices) < 2:
        raise TooShort(f'{prices.security_id}: need at least 2 prices, got {len(prices)}')

    levels = np.asarray(prices.prices, dtype=np.float64)
    rets = np.diff(levels) / levels[:-1]
    return ReturnSeries(prices.security_id, tuple(zip(prices.dates[1:], rets.tolist())))
