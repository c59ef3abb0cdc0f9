"""CSV helpers: comma separated, ``\\n`` line endings, 17 significant digits."""

import csv
import math


def fmt(value):
    """Format one CSV field; ``None`` becomes an empty field."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return format(value, ".17g")
    try:
        return format(float(value), ".17g")
    except (TypeError, ValueError):
        return str(value)


def writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_rows(fh, header, rows):
    w = writer(fh)
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
