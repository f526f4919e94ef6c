"""Run configuration files (``--config``) and option precedence.

A config file uses the ``.env`` syntax read by python-decouple, with
lower-case keys named after the long flags::

    data_dir=data/period1
    events=data/period1/events.csv
    alpha=0.01
    min_run=2

A flag given on the command line wins over the file; the file wins over
the EVENTSTUDY_* settings.
"""
import logging
from pathlib import Path

from decouple import Config, RepositoryEnv

from eventstudy.exceptions import InvalidConfig

logger = logging.getLogger(__name__)

WINDOW_KEYS = {
    'est_start': int,
    'est_end': int,
    'evt_start': int,
    'evt_end': int,
    'min_estimation_days': int,
}

POLICY_KEYS = {
    'alpha': float,
    'min_run': int,
    'run_up_start': int,
    'run_up_end': int,
}

STUDY_KEYS = {
    'data_dir': str,
    'events': str,
    'out': str,
    'strict_day0': bool,
    'threads': int,
    'fixed_clock': str,
    **WINDOW_KEYS,
    **POLICY_KEYS,
}

SIMULATE_KEYS = {
    'seed': int,
    'events': int,
    'market_vol': float,
    'idio_vol': float,
    'true_alpha': float,
    'beta_low': float,
    'beta_high': float,
    'leak_onset': int,
    'leak_drift': float,
    'leak_jump': float,
    'start_date': str,
    'spacing': int,
    'market_id': str,
    'out': str,
    **WINDOW_KEYS,
}

POWER_KEYS = {
    **{k: v for k, v in SIMULATE_KEYS.items() if k not in ('events', 'leak_drift')},
    **POLICY_KEYS,
    'drifts': str,
    'sizes': str,
    'replications': int,
    'threads': int,
}


def read_config_file(path, keys):
    """Typed values for the ``keys`` present in the file at ``path``."""
    path = Path(path)
    if not path.is_file():
        raise InvalidConfig(f'config file not found: {path}')
    try:
        repository = RepositoryEnv(str(path))
    except (OSError, ValueError) as exc:
        raise InvalidConfig(f'{path}: {exc}') from exc

    unknown = sorted(k for k in repository.data if k not in keys)
    if unknown:
        raise InvalidConfig(f"{path}: unknown key(s) {', '.join(unknown)}")

    file_config = Config(repository)
    values = {}
    for key, cast in keys.items():
        if key not in repository.data:
            continue
        try:
            values[key] = file_config(key, cast=cast)
        except ValueError as exc:
            raise InvalidConfig(f'{path}: bad value for {key}: {exc}') from exc
    logger.info('Loaded %d setting(s) from %s', len(values), path)
    return values


def resolve_options(options, keys):
    """Merge command options over the optional config file.

    Options left as None fall through to the file, and past it to None so
    the callers' settings defaults apply.
    """
    path = options.get('config')
    file_values = read_config_file(path, keys) if path else {}
    return {
        key: options.get(key) if options.get(key) is not None else file_values.get(key)
        for key in keys
    }
