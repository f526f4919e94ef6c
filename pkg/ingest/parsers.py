"""CSV readers and writers for price files and the events file."""
import io
import logging
import math
import re
from pathlib import Path

import numpy as np
import pandas as pd

from eventstudy.exceptions import (
    DuplicateDate, EmptyFile, MalformedRow, MissingFile, NonPositivePrice,
)

from .models import EventSpec, PriceSeries

logger = logging.getLogger(__name__)

PRICE_HEADER = ['date', 'adj_close']
EVENT_HEADER = ['security_id', 'market_id', 'announcement_date', 'label']
DATE_FORMAT = '%Y-%m-%d'
ISO_DATE = r'\d{4}-\d{2}-\d{2}'
FIELD_COUNT = re.compile(r'Expected (?P<expected>\d+) fields in line (?P<line>\d+), saw (?P<saw>\d+)')


def _decode(data):
    if isinstance(data, bytes):
        try:
            data = data.decode('utf-8')
        except UnicodeDecodeError as exc:
            raise MalformedRow(f'input is not UTF-8 ({exc})') from exc
    return data.lstrip('\ufeff')


def _read_frame(data, header):
    text = _decode(data)
    if not text.strip():
        raise EmptyFile('file is empty')
    # header=None so a row with extra fields raises instead of being trimmed
    try:
        frame = pd.read_csv(
            io.StringIO(text),
            header=None,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=True,
            on_bad_lines='error',
        )
    except pd.errors.ParserError as exc:
        match = FIELD_COUNT.search(str(exc))
        if match:
            raise MalformedRow(
                f'expected {match["expected"]} fields, saw {match["saw"]}', line=int(match['line'])
            ) from exc
        raise MalformedRow(str(exc)) from exc

    columns = [str(c).strip() for c in frame.iloc[0]]
    if columns != header:
        raise MalformedRow(f"expected header {','.join(header)}, got {','.join(columns)}", line=1)
    frame = frame.iloc[1:].reset_index(drop=True)
    frame.columns = header
    frame = frame.fillna('')
    for column in header:
        frame[column] = frame[column].str.strip()
    # Data rows start on line 2 of the file
    frame['line'] = np.arange(len(frame)) + 2
    return frame


def _as_float(text):
    # float() rounds correctly, so 17-digit prices read back bit-exact
    try:
        return float(text)
    except ValueError:
        return math.nan


def _parse_dates(frame, column):
    # to_datetime alone also takes unpadded dates such as 2019-1-2
    iso = frame[column].str.fullmatch(ISO_DATE)
    parsed = pd.to_datetime(frame[column].where(iso), format=DATE_FORMAT, errors='coerce')
    bad = parsed.isna()
    if bad.any():
        row = frame[bad].iloc[0]
        raise MalformedRow(f'bad date {row[column]!r}', line=int(row['line']))
    return parsed.dt.date


def parse_price_csv(data, security_id=''):
    """Parse a ``date,adj_close`` file into a date-sorted PriceSeries."""
    frame = _read_frame(data, PRICE_HEADER)
    if frame.empty:
        raise EmptyFile(f'{security_id or "price file"}: no data rows')

    dates = _parse_dates(frame, 'date')

    prices = frame['adj_close'].map(_as_float).astype(np.float64)
    bad = prices.isna() | ~np.isfinite(prices)
    if bad.any():
        row = frame[bad].iloc[0]
        raise MalformedRow(f'non-numeric price {row["adj_close"]!r}', line=int(row['line']))
    non_positive = prices <= 0
    if non_positive.any():
        row = frame[non_positive].iloc[0]
        raise NonPositivePrice(f'price must be positive, got {row["adj_close"]}', line=int(row['line']))

    duplicated = dates.duplicated()
    if duplicated.any():
        row = frame[duplicated].iloc[0]
        raise DuplicateDate(f'duplicate date {row["date"]}', line=int(row['line']))

    ordered = pd.DataFrame({'date': dates, 'adj_close': prices}).sort_values('date', kind='mergesort')
    series = PriceSeries(security_id, tuple(zip(ordered['date'], ordered['adj_close'].tolist())))
    logger.debug('Parsed %d prices for %s', len(series), security_id or '<anonymous>')
    return series


def parse_event_csv(data):
    """Parse the events file; one EventSpec per row, in file order."""
    frame = _read_frame(data, EVENT_HEADER)
    if frame.empty:
        raise EmptyFile('events file has no data rows')

    for column in ('security_id', 'market_id'):
        blank = frame[column] == ''
        if blank.any():
            raise MalformedRow(f'{column} is empty', line=int(frame[blank].iloc[0]['line']))

    dates = _parse_dates(frame, 'announcement_date')
    events = [
        EventSpec(
            security_id=row.security_id,
            market_id=row.market_id,
            announcement_date=day,
            label=row.label,
        )
        for row, day in zip(frame.itertuples(index=False), dates)
    ]
    logger.info('Parsed %d events', len(events))
    return events


def format_price_csv(series):
    """Inverse of parse_price_csv: LF endings, 17 significant digits."""
    frame = pd.DataFrame(
        [(d.isoformat(), price) for d, price in series.observations], columns=PRICE_HEADER,
    )
    return frame.to_csv(index=False, lineterminator='\n', float_format='%.17g')


def format_event_csv(events):
    frame = pd.DataFrame(
        [(e.security_id, e.market_id, e.announcement_date.isoformat(), e.label) for e in events],
        columns=EVENT_HEADER,
    )
    return frame.to_csv(index=False, lineterminator='\n')


def load_price_file(data_dir, security_id):
    """Read ``<data_dir>/<security_id>.csv``."""
    path = Path(data_dir) / f'{security_id}.csv'
    if not path.is_file():
        raise MissingFile(f'no price file for {security_id} at {path}')
    try:
        return parse_price_csv(path.read_bytes(), security_id=security_id)
    except MalformedRow as exc:
        raise type(exc)(f'{path.name}: {exc}') from exc


def load_event_file(path):
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f'events file not found: {path}')
    return parse_event_csv(path.read_bytes())
