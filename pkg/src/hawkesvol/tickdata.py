"""Quote ingestion, mid-price event extraction, and empirical diagnostics.

Input is best bid/ask CSV (`timestamp,bid,ask`); output is the marked
mid-price event stream plus the tables used to examine mark/intensity
dependence. Mid prices remove bid-ask bounce, so the minimum jump is the
half tick (default $0.005) and marks are half-tick multiples.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from hawkesvol.core import Direction, EventStream, IntensityPath
from hawkesvol.errors import DataIntegrityError, DegenerateStreamError

_CENT = 0.01


def parse_clock(text: str) -> float:
    """'HH:MM' or 'HH:MM:SS' to seconds since midnight."""
    parts = text.strip().split(":")
    if len(parts) not in (2, 3):
        raise ValueError(f"bad clock time {text!r}")
    h, m = int(parts[0]), int(parts[1])
    s = float(parts[2]) if len(parts) == 3 else 0.0
    return h * 3600.0 + m * 60.0 + s


def format_clock(seconds: float) -> str:
    s = int(round(seconds))
    return f"{s // 3600:02d}:{(s % 3600) // 60:02d}:{s % 60:02d}"


@dataclass(frozen=True)
class SessionConfig:
    open: str = "10:00"
    close: str = "15:30"
    delta: float = 0.005
    subdivide: bool = True
    timestamp_format: str = "clock"  # "clock" (HH:MM:SS) or "epoch" (seconds)

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.open_seconds >= self.close_seconds:
            raise ValueError("session open must precede close")
        if self.timestamp_format not in ("clock", "epoch"):
            raise ValueError(f"unknown timestamp format {self.timestamp_format!r}")

    @property
    def open_seconds(self) -> float:
        return parse_clock(self.open)

    @property
    def close_seconds(self) -> float:
        return parse_clock(self.close)

    @property
    def horizon(self) -> float:
        return self.close_seconds - self.open_seconds


@dataclass(frozen=True)
class QuoteRecord:
    timestamp: float  # seconds since midnight
    bid: float
    ask: float


@dataclass
class ParseDiagnostics:
    rows: int = 0
    crossed_dropped: int = 0
    out_of_session: int = 0


@dataclass
class SessionQuotes:
    day: str
    quotes: list[QuoteRecord]
    diagnostics: ParseDiagnostics = field(default_factory=ParseDiagnostics)


def _check_cent_multiple(price: float, line_no: int, what: str) -> None:
    if price <= 0:
        raise DataIntegrityError(f"line {line_no}: {what} must be positive, got {price}")
    if abs(price / _CENT - round(price / _CENT)) > 1e-9 / _CENT:
        raise DataIntegrityError(
            f"line {line_no}: {what}={price} is not a $0.01 multiple")


def parse_quotes(source, config: SessionConfig = SessionConfig()) -> list[SessionQuotes]:
    """Parse and validate a quote CSV into per-session record lists.

    Rows outside the session window are dropped; crossed quotes (bid > ask)
    are dropped with a diagnostic count. Clock-stamped files hold one
    session; epoch-stamped files are split on calendar days.
    """
    if isinstance(source, (str, Path)):
        with open(source, newline="") as fh:
            return parse_quotes(fh, config)
    reader = csv.reader(source)
    header = next(reader, None)
    if header is None or [h.strip().lower() for h in header[:3]] != ["timestamp", "bid", "ask"]:
        raise DataIntegrityError("expected header 'timestamp,bid,ask'")
    sessions: dict[str, SessionQuotes] = {}
    prev_ts = -math.inf
    open_s, close_s = config.open_seconds, config.close_seconds
    for line_no, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) < 3:
            raise DataIntegrityError(f"line {line_no}: expected 3 fields, got {len(row)}")
        try:
            if config.timestamp_format == "clock":
                ts = parse_clock(row[0])
                day = ""
            else:
                raw = float(row[0])
                day_idx = int(raw // 86400.0)
                ts = raw - day_idx * 86400.0
                day = dt.datetime.fromtimestamp(day_idx * 86400, dt.timezone.utc).strftime("%Y-%m-%d")
            bid = float(row[1])
            ask = float(row[2])
        except ValueError as exc:
            raise DataIntegrityError(f"line {line_no}: {exc}") from exc
        raw_ts = ts if config.timestamp_format == "clock" else day_idx * 86400.0 + ts
        if raw_ts < prev_ts:
            raise DataIntegrityError(f"line {line_no}: timestamps decrease")
        prev_ts = raw_ts
        session = sessions.setdefault(day, SessionQuotes(day, []))
        session.diagnostics.rows += 1
        _check_cent_multiple(bid, line_no, "bid")
        _check_cent_multiple(ask, line_no, "ask")
        if bid > ask:
            session.diagnostics.crossed_dropped += 1
            continue
        if ts < open_s or ts > close_s:
            session.diagnostics.out_of_session += 1
            continue
        session.quotes.append(QuoteRecord(ts, bid, ask))
    return [sessions[k] for k in sorted(sessions)]


def subdivide_timestamps(times, sides, marks, horizon: float) -> EventStream:
    """Spread integer-second stamps to equidistant interior points.

    m events sharing second s move to s + j/(m+1), j=1..m, preserving the
    intra-second order. Streams with native sub-second stamps pass through
    unchanged.
    """
    times = np.asarray(times, dtype=np.float64)
    if times.size and np.any(times != np.floor(times)):
        return EventStream(times, sides, marks, horizon)
    out = times.copy()
    i = 0
    n = times.size
    while i < n:
        j = i
        while j < n and times[j] == times[i]:
            j += 1
        m = j - i
        out[i:j] = times[i] + (np.arange(1, m + 1)) / (m + 1.0)
        i = j
    return EventStream(out, sides, marks, horizon)


def to_mid_events(quotes: Sequence[QuoteRecord], config: SessionConfig = SessionConfig()) -> EventStream:
    """Marked events from mid-price changes, rebased to seconds from session open."""
    open_s = config.open_seconds
    horizon = config.horizon
    times: list[float] = []
    sides: list[int] = []
    marks: list[int] = []
    prev_mid = None
    for q in quotes:
        mid = 0.5 * (q.bid + q.ask)
        if prev_mid is not None and mid != prev_mid:
            jump = (mid - prev_mid) / config.delta
            mark = int(round(abs(jump)))
            if abs(abs(jump) - mark) > 1e-6:
                raise DataIntegrityError(
                    f"mid change {mid - prev_mid:.6f} at t={q.timestamp} is not a "
                    f"multiple of delta={config.delta}")
            times.append(q.timestamp - open_s)
            sides.append(0 if jump > 0 else 1)
            marks.append(mark)
        prev_mid = mid
    if config.subdivide:
        return subdivide_timestamps(times, sides, marks, horizon)
    stream = EventStream(times, sides, marks, horizon)
    return stream


def generate_quotes(stream: EventStream, s0: float,
                    config: SessionConfig = SessionConfig()) -> list[QuoteRecord]:
    """Synthesize a quote sequence whose mid-price path replays the stream.

    Inverse of to_mid_events up to the 1-second stamp resolution: event times
    are floored to whole seconds, so ingesting the result and subdividing
    reproduces the stream exactly when its times are subdivision-canonical.
    """
    if abs(config.delta - 0.005) > 1e-12:
        raise ValueError("quote synthesis assumes the half-tick grid delta=0.005")
    half = round(s0 / config.delta)
    if abs(s0 / config.delta - half) > 1e-9 or half % 2 != 0:
        raise ValueError("s0 must be a $0.01 multiple")

    def _quote(ts: float, mid_h: int) -> QuoteRecord:
        if mid_h % 2 == 0:
            bid_h, ask_h = mid_h - 2, mid_h + 2
        else:
            bid_h, ask_h = mid_h - 1, mid_h + 1
        return QuoteRecord(ts, round(bid_h * config.delta, 2), round(ask_h * config.delta, 2))

    open_s = config.open_seconds
    rows = [_quote(open_s, half)]
    mid_h = half
    for ev in stream:
        mid_h += ev.mark if ev.direction is Direction.UP else -ev.mark
        if mid_h <= 2:
            raise ValueError("price path hit zero; raise s0")
        rows.append(_quote(open_s + math.floor(ev.time), mid_h))
    return rows


def quotes_to_csv(quotes: Iterable[QuoteRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp", "bid", "ask"])
        for q in quotes:
            writer.writerow([format_clock(q.timestamp), f"{q.bid:.2f}", f"{q.ask:.2f}"])


def mark_distribution(stream: EventStream) -> dict[int, float]:
    """Empirical mark pmf in percent, both sides pooled."""
    if len(stream) == 0:
        raise DegenerateStreamError("empty stream has no mark distribution")
    values, counts = np.unique(stream.marks, return_counts=True)
    total = counts.sum()
    return {int(v): float(100.0 * c / total) for v, c in zip(values, counts)}


@dataclass(frozen=True)
class ProxyIntensityRow:
    signed_mark: int
    count: int
    up_mean: float
    up_se: float
    down_mean: float
    down_se: float
    total_mean: float
    total_se: float


def proxy_intensity(stream: EventStream, tau: float = 10.0,
                    window: str = "pre") -> list[ProxyIntensityRow]:
    """Windowed event-count rates adjacent to each event, grouped by signed mark.

    window="pre" counts over [t - tau, t); window="post" over (t, t + tau].
    Events whose window leaves the session are excluded.
    """
    if len(stream) == 0:
        raise DegenerateStreamError("empty stream")
    if window not in ("pre", "post"):
        raise ValueError("window must be 'pre' or 'post'")
    t = stream.times
    t_up = t[stream.sides == 0]
    t_down = t[stream.sides == 1]
    if window == "pre":
        ok = t - tau >= 0.0
        up_cnt = np.searchsorted(t_up, t, "left") - np.searchsorted(t_up, t - tau, "left")
        down_cnt = np.searchsorted(t_down, t, "left") - np.searchsorted(t_down, t - tau, "left")
    else:
        ok = t + tau <= stream.horizon
        up_cnt = np.searchsorted(t_up, t + tau, "right") - np.searchsorted(t_up, t, "right")
        down_cnt = np.searchsorted(t_down, t + tau, "right") - np.searchsorted(t_down, t, "right")
    up_rate = up_cnt / tau
    down_rate = down_cnt / tau
    signed = np.where(stream.sides == 0, stream.marks, -stream.marks)
    rows = []
    for sm in sorted(np.unique(signed[ok]), reverse=True):
        sel = ok & (signed == sm)
        n = int(np.count_nonzero(sel))

        def _stats(x):
            mean = float(np.mean(x))
            se = float(np.std(x, ddof=1) / math.sqrt(n)) if n > 1 else float("nan")
            return mean, se

        um, us = _stats(up_rate[sel])
        dm, ds = _stats(down_rate[sel])
        tm, ts_ = _stats(up_rate[sel] + down_rate[sel])
        rows.append(ProxyIntensityRow(int(sm), n, um, us, dm, ds, tm, ts_))
    return rows


@dataclass(frozen=True)
class MarkMeanBin:
    bin_upper: int  # lambda in (bin_upper-1, bin_upper]
    count: int
    mean_mark: float
    low_count: bool


def conditional_mark_mean(stream: EventStream, intensity_path: IntensityPath,
                          min_count: int = 100) -> list[MarkMeanBin]:
    """Mean mark conditional on the inferred own-side intensity bin (n-1, n]."""
    if len(stream) == 0:
        raise DegenerateStreamError("empty stream")
    lam = intensity_path.own_side(stream.sides)
    bins = np.ceil(lam).astype(np.int64)
    rows = []
    for b in np.unique(bins):
        sel = bins == b
        n = int(np.count_nonzero(sel))
        rows.append(MarkMeanBin(int(b), n, float(np.mean(stream.marks[sel])), n < min_count))
    return rows


# ---------------------------------------------------------------------------
# event-stream serialization
# ---------------------------------------------------------------------------

def write_stream_csv(stream: EventStream, path, sidecar: dict | None = None) -> None:
    """CSV `time,direction,mark` plus a JSON sidecar carrying the horizon."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "direction", "mark"])
        for t, s, k in zip(stream.times, stream.sides, stream.marks):
            writer.writerow([repr(float(t)), Direction(int(s)).label(), int(k)])
    meta = {"horizon": stream.horizon, "n_events": len(stream)}
    if sidecar:
        meta.update(sidecar)
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def read_stream_csv(path, horizon: float | None = None) -> EventStream:
    path = Path(path)
    if horizon is None:
        sidecar = path.with_suffix(".json")
        if not sidecar.exists():
            raise DataIntegrityError(f"no horizon given and no sidecar {sidecar}")
        horizon = json.loads(sidecar.read_text())["horizon"]
    times: list[float] = []
    sides: list[int] = []
    marks: list[int] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:3]] != ["time", "direction", "mark"]:
            raise DataIntegrityError("expected header 'time,direction,mark'")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                times.append(float(row[0]))
                sides.append(int(Direction.parse(row[1])))
                marks.append(int(row[2]))
            except (ValueError, IndexError) as exc:
                raise DataIntegrityError(f"line {line_no}: {exc}") from exc
    return EventStream(times, sides, marks, horizon)
