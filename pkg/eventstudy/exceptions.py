"""Error hierarchy shared by every app.

``exit_code`` is what the command line returns when the error ends a run:
1 for usage/configuration problems, 2 for problems with the data.
"""


class EventStudyError(Exception):
    exit_code = 2


class InvalidConfig(EventStudyError):
    exit_code = 1


class DataError(EventStudyError):
    exit_code = 2


# Ingestion

class MalformedRow(DataError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f'line {line}: {message}' if line is not None else message)


class NonPositivePrice(MalformedRow):
    pass


class DuplicateDate(MalformedRow):
    pass


class EmptyFile(DataError):
    pass


class MissingFile(DataError):
    pass


class AnnouncementNotTradingDay(DataError):
    pass


class InsufficientHistory(DataError):
    pass


class IndexMismatch(DataError):
    pass


# Returns

class TooShort(DataError):
    pass


# Market model

class DegenerateRegressor(DataError):
    pass


class TooFewObservations(DataError):
    pass


class NoUsableEvents(DataError):
    pass


# Event study statistics

class NoData(DataError):
    pass


class InsufficientCrossSection(DataError):
    pass


class ZeroDispersion(DataError):
    pass


class UnknownEvent(DataError):
    pass


class UndefinedFraction(DataError):
    pass


# Reports

class IoError(EventStudyError):
    """Writing report files failed."""
    exit_code = 2
