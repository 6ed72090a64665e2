"""CSV emitters: header row, LF endings, floats at 17 significant digits, atomic writes."""

from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

DISTRIBUTION_HEADER = ("m", "probability")
HISTOGRAM_HEADER = ("bin_left", "bin_right", "mass")
MOMENT_HEADER = ("n", "s", "value")
SIM_MOMENT_HEADER = ("s", "simulated", "quadrature", "abs_diff")
CONVERGENCE_HEADER = ("N", "max_entry_error", "predicted_sigma")


def fmt(x) -> str:
    if isinstance(x, (int, str)) and not isinstance(x, bool):
        return str(x)
    return format(float(x), ".17g")


def render(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_text_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def distribution_rows(dist, drop_below: float | None = None):
    for m, p in zip(dist.sites, dist.probs):
        if drop_below is None or abs(p) > drop_below:
            yield int(m), float(p)


def histogram_rows(hist):
    for left, right, mass in zip(hist.edges[:-1], hist.edges[1:], hist.masses):
        yield float(left), float(right), float(mass)


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
