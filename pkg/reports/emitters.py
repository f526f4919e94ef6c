"""Report files: ``report.json`` plus CSV tables and plot data."""
import json
import logging
from pathlib import Path

import pandas as pd

from eventstudy.exceptions import IoError, MalformedRow, MissingFile
from studies.statistics import format_percent

from .models import Report

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'

DAY_STATS_COLUMNS = ['event_day', 'aar', 'sigma', 'n', 't_stat', 'p_value', 'significant', 'caar']
FIT_COLUMNS = ['event', 'alpha', 'beta', 'n_obs', 'residual_variance', 'r_squared']

FORMATS = ('json', 'day_stats', 'aar', 'caar', 'fits')


def dumps(data):
    return json.dumps(data, indent=2, sort_keys=True) + '\n'


def _write_text(path, text):
    try:
        path.write_bytes(text.encode('utf-8'))
    except OSError as exc:
        raise IoError(f'cannot write {path}: {exc}') from exc
    return path


def _write_csv(path, frame):
    try:
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep='', lineterminator='\n')
    except OSError as exc:
        raise IoError(f'cannot write {path}: {exc}') from exc
    return path


def day_stats_frame(report):
    return pd.DataFrame([s.as_dict() for s in report.stats], columns=DAY_STATS_COLUMNS)


def series_frame(report, column):
    """Two-column ``event_day,value`` plot data for AAR or CAAR."""
    frame = day_stats_frame(report)[['event_day', column]]
    return frame.rename(columns={column: 'value'})


def fits_frame(report):
    return pd.DataFrame([f.as_dict() for f in report.fits], columns=FIT_COLUMNS)


def emit_report(report, out_dir, formats=FORMATS):
    """Write the requested files into ``out_dir``; returns the paths written."""
    unknown = set(formats) - set(FORMATS)
    if unknown:
        raise ValueError(f'unknown report format(s): {sorted(unknown)}')
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f'cannot create {out_dir}: {exc}') from exc

    written = []
    if 'json' in formats:
        written.append(_write_text(out_dir / 'report.json', dumps(report.to_dict())))
    if 'day_stats' in formats:
        written.append(_write_csv(out_dir / 'day_stats.csv', day_stats_frame(report)))
    if 'aar' in formats:
        written.append(_write_csv(out_dir / 'aar.csv', series_frame(report, 'aar')))
    if 'caar' in formats:
        written.append(_write_csv(out_dir / 'caar.csv', series_frame(report, 'caar')))
    if 'fits' in formats:
        written.append(_write_csv(out_dir / 'fits.csv', fits_frame(report)))
    logger.info('Wrote %s to %s', ', '.join(p.name for p in written), out_dir)
    return written


def load_report(path):
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f'report not found: {path}')
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
        return Report.from_dict(data)
    except (ValueError, KeyError, TypeError) as exc:
        raise MalformedRow(f'{path.name}: not a study report ({exc})') from exc


def emit_comparison(comparison, out_dir):
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f'cannot create {out_dir}: {exc}') from exc
    return _write_text(out_dir / 'comparison.json', dumps(comparison.as_dict()))


def format_days(days):
    return ', '.join(str(d) for d in days) if days else 'none'


def summary_lines(report):
    """Human-readable digest printed after a study run."""
    fraction = report.reaction_fraction
    lines = [
        f'Events: {len(report.events)} used, {len(report.excluded)} excluded',
        f'Significant days: {format_days(report.significant_days)}',
        f"Reaction fraction: {format_percent(fraction) if fraction is not None else 'undefined'}",
        f'CAAR(0): {report.caar_at(0):.4f}',
        f'Decision: {report.hypothesis_decision.value}',
    ]
    for exclusion in report.excluded:
        lines.append(f'  excluded {exclusion.event_key}: {exclusion.reason}')
    return lines


def comparison_lines(comparison):
    lines = []
    for side, label in (('first', comparison.first_label), ('second', comparison.second_label)):
        summary = getattr(comparison, side)
        fraction = summary['reaction_fraction']
        lines.append(
            f"{label}: {summary['hypothesis_decision']}, reaction "
            f"{format_percent(fraction) if fraction is not None else 'undefined'}, "
            f"{summary['significant_pre_days']} significant pre-announcement day(s)"
        )
    if comparison.dispersion_ratio is not None:
        lines.append(f'Pre-announcement AAR dispersion ratio: {comparison.dispersion_ratio:.3f}')
    return lines


def emit_power(cells, out_dir, config):
    """``power.json`` (with per-day significance frequencies) and ``power.csv``."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f'cannot create {out_dir}: {exc}') from exc
    table = pd.DataFrame(
        [{k: v for k, v in cell.as_dict().items() if k != 'day_frequency'} for cell in cells],
        columns=['daily_drift', 'n_events', 'replications', 'rejections', 'rejection_rate'],
    )
    return [
        _write_text(out_dir / 'power.json', dumps({'config': config, 'cells': [c.as_dict() for c in cells]})),
        _write_csv(out_dir / 'power.csv', table),
    ]
