"""CSV, SVG, verdict, and manifest emission, plus channel comparison.

CSV cells carry 17 significant digits so doubles round-trip exactly and
reruns can be compared byte-for-byte.  SVG charts are generated natively
as polyline plots; no plotting dependency.
"""

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(path, times, channels: dict) -> Path:
    """Time-series CSV: first column t, one column per named channel."""
    path = Path(path)
    times = np.asarray(times, dtype=float)
    names = list(channels)
    columns = [np.asarray(channels[n], dtype=float) for n in names]
    for name, col in zip(names, columns):
        if col.shape != times.shape:
            raise ValueError(f"channel {name!r} does not align with the time grid")
    lines = ["t," + ",".join(names)]
    for i in range(times.size):
        row = [format_float(times[i])] + [format_float(col[i]) for col in columns]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_table_csv(path, header, rows) -> Path:
    """Plain tabular CSV for non-time-series output (classification grids)."""
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_float(c) if isinstance(c, float) else str(c)
                              for c in row))
    path.write_text("\n".join(lines) + "\n")
    return path


@dataclass
class Verdict:
    assertion_id: str
    passed: bool
    measured: float
    tolerance: float

    def line(self) -> str:
        return "\t".join([self.assertion_id, "pass" if self.passed else "fail",
                          format_float(self.measured), format_float(self.tolerance)])


def write_verdicts(path, verdicts) -> Path:
    path = Path(path)
    path.write_text("\n".join(v.line() for v in verdicts) + "\n")
    return path


def write_manifest(path, config, wall_time: float, version: str) -> Path:
    lines = [f"experiment = {config.kind}",
             f"version = {version}",
             f"seed = {config.seed}",
             f"out = {config.out}"]
    for key in sorted(config.params):
        lines.append(f"{key} = {config.params[key]}")
    lines.append(f"wall_time_s = {wall_time:.3f}")
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


@dataclass
class ChannelVerdict:
    passed: bool
    max_deviation: float
    argmax_time: float
    tolerance: float


def compare_channels(times_a, a, times_b, b, tolerance: float, mode: str = "absolute",
                     window=None) -> ChannelVerdict:
    """Max deviation between two series on a shared grid, strict inequality.

    mode 'relative' divides by |b| (the reference series).  window is an
    optional (t_lo, t_hi) restriction.
    """
    times_a = np.asarray(times_a, dtype=float)
    times_b = np.asarray(times_b, dtype=float)
    if times_a.shape != times_b.shape or not np.allclose(times_a, times_b, rtol=0, atol=1e-12):
        raise ValueError("series do not share a time grid")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mask = np.ones(times_a.shape, dtype=bool)
    if window is not None:
        lo, hi = window
        mask = (times_a >= lo) & (times_a <= hi)
        if not np.any(mask):
            raise ValueError("comparison window contains no samples")
    dev = np.abs(a - b)[mask]
    if mode == "relative":
        dev = dev / np.abs(b)[mask]
    elif mode != "absolute":
        raise ValueError(f"unknown comparison mode {mode!r}")
    idx = int(np.argmax(dev))
    max_dev = float(dev[idx])
    t_at = float(times_a[mask][idx])
    return ChannelVerdict(passed=bool(max_dev < tolerance), max_deviation=max_dev,
                          argmax_time=t_at, tolerance=tolerance)


# ---------------------------------------------------------------------------
# native SVG polyline charts

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
           "#17becf", "#7f7f7f", "#bcbd22", "#e377c2", "#4b0082", "#a0522d")
_W, _H = 640, 420
_ML, _MR, _MT, _MB = 64, 16, 36, 44


def _nice_ticks(lo: float, hi: float, n: int = 5):
    if not math.isfinite(lo) or not math.isfinite(hi):
        return [0.0, 1.0]
    if hi <= lo:
        hi = lo + (abs(lo) if lo != 0 else 1.0)
    span = hi - lo
    raw = span / max(n, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    ticks = []
    value = start
    while value <= hi + 1e-9 * span:
        ticks.append(0.0 if abs(value) < 1e-12 * span else value)
        value += step
    return ticks or [lo, hi]


def _fmt_tick(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return format(v, ".2e")
    return format(v, ".6g")


def write_svg(path, title: str, series, xlabel: str = "t", ylabel: str = "") -> Path:
    """Polyline chart; series is a list of (name, x array, y array)."""
    path = Path(path)
    xs = np.concatenate([np.asarray(s[1], dtype=float) for s in series])
    ys = np.concatenate([np.asarray(s[2], dtype=float) for s in series])
    finite = np.isfinite(ys)
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo, y_hi = float(ys[finite].min()), float(ys[finite].max())
    if y_hi == y_lo:
        y_hi = y_lo + (abs(y_lo) if y_lo != 0 else 1.0)
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    plot_w = _W - _ML - _MR
    plot_h = _H - _MT - _MB

    def px(x):
        return _ML + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y):
        return _MT + (y_hi - y) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_W} {_H}" '
        f'font-family="sans-serif" font-size="11">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="20" text-anchor="middle" font-size="13">{title}</text>',
        f'<rect x="{_ML}" y="{_MT}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#333" stroke-width="1"/>',
    ]
    for tick in _nice_ticks(x_lo, x_hi):
        if tick < x_lo - 1e-12 or tick > x_hi + 1e-12:
            continue
        x = px(tick)
        parts.append(f'<line x1="{x:.2f}" y1="{_MT + plot_h}" x2="{x:.2f}" '
                     f'y2="{_MT + plot_h + 4}" stroke="#333"/>')
        parts.append(f'<text x="{x:.2f}" y="{_MT + plot_h + 16}" '
                     f'text-anchor="middle">{_fmt_tick(tick)}</text>')
    for tick in _nice_ticks(y_lo, y_hi):
        if tick < y_lo - 1e-12 or tick > y_hi + 1e-12:
            continue
        y = py(tick)
        parts.append(f'<line x1="{_ML - 4}" y1="{y:.2f}" x2="{_ML}" y2="{y:.2f}" stroke="#333"/>')
        parts.append(f'<text x="{_ML - 7}" y="{y + 3.5:.2f}" text-anchor="end">{_fmt_tick(tick)}</text>')
    parts.append(f'<text x="{_ML + plot_w / 2:.1f}" y="{_H - 8}" '
                 f'text-anchor="middle">{xlabel}</text>')
    if ylabel:
        parts.append(f'<text x="14" y="{_MT + plot_h / 2:.1f}" text-anchor="middle" '
                     f'transform="rotate(-90 14 {_MT + plot_h / 2:.1f})">{ylabel}</text>')

    for i, (name, x, y) in enumerate(series):
        color = _COLORS[i % len(_COLORS)]
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        step = max(1, x.size // 2000)  # cap polyline length
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x[::step], y[::step])
                       if math.isfinite(b))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     f'stroke-width="1.3"/>')
        ly = _MT + 14 + 14 * i
        parts.append(f'<line x1="{_ML + plot_w - 130}" y1="{ly - 4}" '
                     f'x2="{_ML + plot_w - 110}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{_ML + plot_w - 105}" y="{ly}">{name}</text>')
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n")
    return path
