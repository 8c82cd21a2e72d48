"""CSV and SVG emission for energy curves.

The CSV layout is fixed: comment lines carrying the config hash and seed,
then a header `T_us,E_q,E_q_err,E_cl,E_cl_err,Dq_analytic,Dcl_analytic`,
then one row per pulse period in decimal notation at 10 significant
digits.  Values a backend did not produce are written as nan, so every
file round-trips through read_csv unchanged.

The SVG writer is self-contained (no renderer dependencies): one polyline
plus circle markers per series, vertical segments for error bars, axes
with decimal tick labels, and a legend.
"""

from __future__ import annotations

import math

import numpy as np

from .sweep import CurveRow, EnergyCurve

CSV_HEADER = "T_us,E_q,E_q_err,E_cl,E_cl_err,Dq_analytic,Dcl_analytic"

_SERIES = (
    ("e_q", "e_q_err", "quantum", "#1f4e9c"),
    ("e_cl", "e_cl_err", "classical", "#b3341f"),
    ("dq_analytic", None, "Dq analytic", "#2b8a4b"),
    ("dcl_analytic", None, "Dcl analytic", "#8a6d2b"),
)


def _fmt(value):
    if math.isnan(value):
        return "nan"
    return np.format_float_positional(value, precision=10, unique=False,
                                      fractional=False, trim="0")


def emit_csv(curve: EnergyCurve, path):
    """Write one curve; deterministic bytes for a given curve."""
    lines = []
    meta = curve.metadata
    lines.append(f"# kickedrotor sweep v{meta.get('version', '?')}")
    lines.append(f"# config_hash={meta.get('config_hash', '?')} "
                 f"seed={meta.get('seed', '?')} phi_d={meta.get('phi_d', '?')}")
    lines.append(CSV_HEADER)
    for row in curve.rows:
        if row.failed:
            lines.append(f"# failed: T_us={_fmt(row.period * 1e6)}")
        lines.append(",".join([
            _fmt(row.period * 1e6), _fmt(row.e_q), _fmt(row.e_q_err),
            _fmt(row.e_cl), _fmt(row.e_cl_err),
            _fmt(row.dq_analytic), _fmt(row.dcl_analytic)]))
    try:
        with open(path, "w") as handle:
            handle.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def read_csv(path):
    """Parse a sweep CSV back into an EnergyCurve (metadata from comments)."""
    metadata = {}
    rows = []
    failed_periods = set()
    with open(path) as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "failed:" in line:
                    _, _, value = line.rpartition("=")
                    failed_periods.add(float(value))
                    continue
                for token in line[1:].split():
                    if "=" in token:
                        key, _, value = token.partition("=")
                        metadata[key] = value
                continue
            if line == CSV_HEADER:
                continue
            parts = line.split(",")
            if len(parts) != 7:
                raise ValueError(f"malformed CSV row in {path}: {line!r}")
            values = [float(p) for p in parts]
            rows.append(CurveRow(period=values[0] * 1e-6, e_q=values[1],
                                 e_q_err=values[2], e_cl=values[3],
                                 e_cl_err=values[4], dq_analytic=values[5],
                                 dcl_analytic=values[6],
                                 failed=values[0] in failed_periods))
    return EnergyCurve(rows=rows, metadata=metadata)


def _ticks(lo, hi, count=6):
    if not math.isfinite(lo) or not math.isfinite(hi) or hi <= lo:
        return [lo]
    raw = (hi - lo) / (count - 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = min(s for s in (mag, 2 * mag, 2.5 * mag, 5 * mag, 10 * mag) if s >= raw)
    first = math.ceil(lo / step) * step
    ticks = []
    value = first
    while value <= hi + 1e-9 * step:
        ticks.append(round(value, 12))
        value += step
    return ticks


def emit_plot(curve: EnergyCurve, path, width=760, height=500):
    """Write a self-contained SVG of E' (and analytic rates) versus T."""
    if not curve.rows:
        raise ValueError("cannot plot an empty curve")
    margin_l, margin_r, margin_t, margin_b = 64, 16, 40, 48
    plot_w = width - margin_l - margin_r
    plot_h = height - margin_t - margin_b

    t_us = curve.column("period") * 1e6
    series = []
    for value_name, err_name, label, color in _SERIES:
        values = curve.column(value_name)
        if np.all(np.isnan(values)):
            continue
        errs = curve.column(err_name) if err_name else None
        series.append((label, color, values, errs, value_name))
    if not series:
        raise ValueError("curve has no finite series to plot")

    x_lo, x_hi = float(np.min(t_us)), float(np.max(t_us))
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    y_vals = np.concatenate([v[~np.isnan(v)] for _, _, v, _, _ in series])
    y_lo = float(min(0.0, np.min(y_vals)))
    y_hi = float(np.max(y_vals)) * 1.05 or 1.0

    def sx(value):
        return margin_l + (value - x_lo) / (x_hi - x_lo) * plot_w

    def sy(value):
        return margin_t + plot_h - (value - y_lo) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{margin_l}" y="{margin_t}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#444" stroke-width="1"/>',
    ]
    for tick in _ticks(x_lo, x_hi):
        x = sx(tick)
        parts.append(f'<line x1="{x:.2f}" y1="{margin_t + plot_h}" x2="{x:.2f}" '
                     f'y2="{margin_t + plot_h + 5}" stroke="#444"/>')
        parts.append(f'<text x="{x:.2f}" y="{margin_t + plot_h + 20}" '
                     f'font-size="12" text-anchor="middle">{tick:g}</text>')
    for tick in _ticks(y_lo, y_hi):
        y = sy(tick)
        parts.append(f'<line x1="{margin_l - 5}" y1="{y:.2f}" x2="{margin_l}" '
                     f'y2="{y:.2f}" stroke="#444"/>')
        parts.append(f'<text x="{margin_l - 8}" y="{y + 4:.2f}" font-size="12" '
                     f'text-anchor="end">{tick:g}</text>')
    parts.append(f'<text x="{margin_l + plot_w / 2}" y="{height - 10}" '
                 'font-size="13" text-anchor="middle">pulse period T (us)</text>')
    parts.append(f'<text x="16" y="{margin_t + plot_h / 2}" font-size="13" '
                 f'text-anchor="middle" transform="rotate(-90 16 '
                 f'{margin_t + plot_h / 2})">E&#8242; (two-photon recoils)&#178;/2</text>')
    phi_d = curve.metadata.get("phi_d")
    if phi_d is not None:
        parts.append(f'<text x="{margin_l}" y="24" font-size="13">'
                     f'energy after kicks, phi_d = {phi_d}</text>')

    for idx, (label, color, values, errs, name) in enumerate(series):
        points = [(sx(t), sy(v)) for t, v in zip(t_us, values) if not math.isnan(v)]
        if len(points) > 1:
            joined = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
            parts.append(f'<polyline points="{joined}" fill="none" '
                         f'stroke="{color}" stroke-width="1.3"/>')
        if errs is not None:
            for t, v, e in zip(t_us, values, errs):
                if math.isnan(v) or math.isnan(e) or e <= 0:
                    continue
                parts.append(f'<line x1="{sx(t):.2f}" y1="{sy(v - e):.2f}" '
                             f'x2="{sx(t):.2f}" y2="{sy(v + e):.2f}" '
                             f'stroke="{color}" stroke-width="1"/>')
        for t, v in zip(t_us, values):
            if math.isnan(v):
                continue
            parts.append(f'<circle class="marker-{name}" cx="{sx(t):.2f}" '
                         f'cy="{sy(v):.2f}" r="2.5" fill="{color}"/>')
        ly = margin_t + 14 + 16 * idx
        lx = margin_l + plot_w - 150
        parts.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{lx + 28}" y="{ly}" font-size="12">{label}</text>')

    parts.append("</svg>")
    try:
        with open(path, "w") as handle:
            handle.write("\n".join(parts) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write plot to {path}: {exc}") from exc
