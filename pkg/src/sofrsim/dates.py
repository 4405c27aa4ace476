"""Calendar utilities: day counts, business days, futures reference periods.

Dates are plain ``datetime.date`` objects (exact integer day arithmetic via
``toordinal``).  The day-count fraction is fixed at ACT/360, i.e. one day
counts as 1/360 of a year.
"""

from __future__ import annotations

import calendar as _cal
import datetime as dt
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ConfigError, NoBusinessDayError

#: one-day accrual fraction used everywhere in the package
DAY_FRACTION = 1.0 / 360.0

_LOOKBACK_DAYS = 30


def day_offset(d: dt.date, origin: dt.date) -> int:
    """Exact number of days from *origin* to *d* (negative if earlier)."""
    return d.toordinal() - origin.toordinal()


def add_days(d: dt.date, n: int) -> dt.date:
    return dt.date.fromordinal(d.toordinal() + n)


def third_wednesday(year: int, month: int) -> dt.date:
    """The unique Wednesday of the month with day-of-month in [15, 21]."""
    first = dt.date(year, month, 1)
    shift = (2 - first.weekday()) % 7  # 2 = Wednesday
    return dt.date(year, month, 1 + shift + 14)


def three_month_reference_period(delivery_year: int, delivery_month: int) -> tuple[dt.date, dt.date]:
    """Reference period of a quarterly futures contract.

    Runs from the third Wednesday of the third calendar month before the
    delivery month to the third Wednesday of the delivery month.
    """
    m = delivery_month - 3
    y = delivery_year
    if m < 1:
        m += 12
        y -= 1
    start = third_wednesday(y, m)
    end = third_wednesday(delivery_year, delivery_month)
    return start, end


def one_month_reference_period(year: int, month: int) -> tuple[dt.date, dt.date]:
    """First and last calendar day of the month."""
    last = _cal.monthrange(year, month)[1]
    return dt.date(year, month, 1), dt.date(year, month, last)


def is_business_day(d: dt.date, holidays: frozenset[dt.date] | set[dt.date] = frozenset()) -> bool:
    return d.weekday() < 5 and d not in holidays


def prior_business_day(d: dt.date, holidays: frozenset[dt.date] | set[dt.date] = frozenset()) -> dt.date:
    """Latest business day at or before *d*.

    Raises NoBusinessDayError if none is found within a 30-day lookback.
    """
    cur = d
    for _ in range(_LOOKBACK_DAYS + 1):
        if is_business_day(cur, holidays):
            return cur
        cur = add_days(cur, -1)
    raise NoBusinessDayError(f"no business day within {_LOOKBACK_DAYS} days before {d}")


def month_ends(start: dt.date, end: dt.date) -> list[dt.date]:
    """Calendar month-end dates strictly after *start* and at or before *end*."""
    out = []
    y, m = start.year, start.month
    while True:
        last = dt.date(y, m, _cal.monthrange(y, m)[1])
        if last > end:
            break
        if last > start:
            out.append(last)
        m += 1
        if m > 12:
            m = 1
            y += 1
    return out


@dataclass(frozen=True)
class Schedule:
    """Ordered list of dates with a kind tag ('fomc', 'monthly' or 'daily')."""

    dates: tuple[dt.date, ...]
    kind: str = "monthly"

    def __post_init__(self):
        if not self.dates:
            raise ConfigError("schedule must contain at least one date")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ConfigError("schedule dates must be strictly increasing")

    def offsets(self, origin: dt.date) -> list[int]:
        return [day_offset(d, origin) for d in self.dates]

    @classmethod
    def monthly(cls, start: dt.date, end: dt.date) -> "Schedule":
        return cls(tuple(month_ends(start, end)), kind="monthly")


def read_date_file(path) -> list[dt.date]:
    """Parse a schedule file: one ISO-8601 date per line, '#' comments allowed."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                out.append(dt.date.fromisoformat(line))
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: invalid date {line!r}") from exc
    return out


def parse_schedule(dates: Iterable[dt.date] | Sequence[dt.date], kind: str) -> Schedule:
    return Schedule(tuple(sorted(set(dates))), kind=kind)
