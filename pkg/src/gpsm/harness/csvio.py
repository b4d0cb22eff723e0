"""CSV emission for curve records.

Layout::

    # gpsm-curves v1
    # <free-form metadata lines>
    sweep_x,source,n_a,e_s_ant,e_b_eff,mib,rate,q_norm,ci_halfwidth,trials
    # group alpha=0.4 rho=0.5
    ...rows...

Comment lines start with ``#``. A ``# group`` line precedes the rows of
each curve family (fixed ``rho``, ``alpha``, metric, ...). NaN fields are
left empty.
"""

from __future__ import annotations

import csv
import io
import math
from typing import Iterable, Sequence, TextIO

from .sweeps import CurveRecord

__all__ = ["COLUMNS", "FORMAT_VERSION", "write_records", "records_to_csv", "read_rows"]

FORMAT_VERSION = "gpsm-curves v1"
COLUMNS = ("sweep_x", "source", "n_a", "e_s_ant", "e_b_eff", "mib", "rate", "q_norm", "ci_halfwidth", "trials")
ENERGY_NOTE = "q_norm is harvested energy normalised to its rho = 1 value, equal to rho for xi = 1"


def _fmt(v: float) -> str:
    if isinstance(v, float) and math.isnan(v):
        return ""
    return repr(float(v))


def _group_line(group: dict) -> str:
    return "# group " + " ".join(f"{k}={group[k]}" for k in sorted(group))


def write_records(records: Iterable[CurveRecord], fh: TextIO, metadata: Sequence[str] = ()) -> None:
    fh.write(f"# {FORMAT_VERSION}\n")
    fh.write(f"# {ENERGY_NOTE}\n")
    for line in metadata:
        fh.write(f"# {line}\n")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(COLUMNS)
    current = None
    for r in records:
        line = _group_line(r.group) if r.group else None
        if line != current and line is not None:
            fh.write(line + "\n")
        current = line
        writer.writerow(
            [_fmt(r.x), r.source, r.n_a, _fmt(r.e_s_ant), _fmt(r.e_b_eff), _fmt(r.mib), _fmt(r.rate),
             _fmt(r.q_normalized), _fmt(r.ci_halfwidth), r.trials]
        )


def records_to_csv(records: Iterable[CurveRecord], metadata: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    write_records(records, buf, metadata)
    return buf.getvalue()


def read_rows(text: str) -> list[dict]:
    """Parse CSV text back into dicts, skipping comment lines."""
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    return list(csv.DictReader(lines))
