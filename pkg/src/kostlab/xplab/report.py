"""CSV, JSON and SVG output of trial records."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from .fit import ScalingFit, degree_means, scaling_fit
from .runner import TrialRecord, discard_rates

CSV_HEADER = ("experiment_id", "m", "k", "d", "trial", "seed", "statistic", "value",
              "discarded", "runtime_ms")


def _num(v):
    v = float(v)
    if math.isnan(v):
        return "nan"
    return str(int(v)) if v.is_integer() and abs(v) < 2 ** 53 else repr(v)


def format_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([r.experiment_id, r.m, r.k, r.d, r.trial, r.seed, r.statistic,
                    _num(r.value), int(r.discarded), _num(round(r.runtime_ms, 3))])
    return buf.getvalue()


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError("not a records CSV (header mismatch)")
    return [TrialRecord(r[0], int(r[1]), int(r[2]), int(r[3]), int(r[4]), int(r[5]), r[6],
                        float(r[7]), r[8] == "1", float(r[9])) for r in rows[1:]]


def summary(records, statistic, fit: ScalingFit | None = None) -> dict:
    rates = discard_rates(records)
    per = {str(d): {"mean": m, "se": se, "n": n, "discard_rate": rates.get(d, 0.0)}
           for d, (m, se, n) in degree_means(records, statistic).items()}
    out = {"experiment_id": records[0].experiment_id, "m": records[0].m, "k": records[0].k,
           "statistic": statistic, "degrees": per}
    if fit is not None:
        out["fit"] = {"slope": fit.slope, "intercept": fit.intercept, "slope_se": fit.slope_se,
                      "r2": fit.r2, "degrees": list(fit.degrees)}
    return out


def format_json(records, statistic, fit=None) -> str:
    return json.dumps(summary(records, statistic, fit), indent=2, sort_keys=True) + "\n"


def format_svg(records, statistic, fit: ScalingFit | None = None, width=480, height=360) -> str:
    """Log-log scatter of per-degree means with error bars and the fitted line."""
    means = {d: v for d, v in degree_means(records, statistic).items() if v[0] > 0}
    pad = 50
    if not means:
        pts = []
        xs = ys = [0.0, 1.0]
    else:
        pts = [(math.log(d), math.log(m), se / m) for d, (m, se, _) in means.items()]
        xs = [p[0] for p in pts]
        ys = [p[1] + s for p in pts for s in (-p[2], p[2])]
    x0, x1 = min(xs) - 0.1, max(xs) + 0.1
    y0, y1 = min(ys) - 0.1, max(ys) + 0.1

    def X(v):
        return pad + (v - x0) / (x1 - x0) * (width - 2 * pad)

    def Y(v):
        return height - pad - (v - y0) / (y1 - y0) * (height - 2 * pad)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" '
           'stroke="black"/>',
           f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
           f'<text x="{width / 2:.1f}" y="{height - 12}" text-anchor="middle" '
           'font-size="12">log d</text>',
           f'<text x="14" y="{height / 2:.1f}" font-size="12" transform="rotate(-90 14 '
           f'{height / 2:.1f})" text-anchor="middle">log mean {statistic}</text>']
    for x, y, rel in pts:
        lo, hi = y + math.log1p(-min(rel, 0.999)), y + math.log1p(rel)
        out.append(f'<line x1="{X(x):.2f}" y1="{Y(lo):.2f}" x2="{X(x):.2f}" y2="{Y(hi):.2f}" '
                   'stroke="gray"/>')
        out.append(f'<circle cx="{X(x):.2f}" cy="{Y(y):.2f}" r="3" fill="black"/>')
    if fit is not None and pts:
        ya, yb = fit.slope * x0 + fit.intercept, fit.slope * x1 + fit.intercept
        out.append(f'<line x1="{X(x0):.2f}" y1="{Y(ya):.2f}" x2="{X(x1):.2f}" y2="{Y(yb):.2f}" '
                   'stroke="steelblue" stroke-dasharray="4 3"/>')
        out.append(f'<text x="{width - pad}" y="{pad - 10}" text-anchor="end" font-size="12">'
                   f'slope {fit.slope:.3f} &#177; {fit.slope_se:.3f}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_report(records, statistic, out_dir, formats=("csv", "json", "svg"), fit="auto"):
    """Write ``records.csv``, ``summary.json`` and ``scaling.svg``; returns written paths."""
    if not records:
        raise ValueError("no records to report")
    if fit == "auto":
        try:
            fit = scaling_fit(records, statistic)
        except ValueError:
            fit = None
    texts = {"csv": ("records.csv", lambda: format_csv(records)),
             "json": ("summary.json", lambda: format_json(records, statistic, fit)),
             "svg": ("scaling.svg", lambda: format_svg(records, statistic, fit))}
    rendered = {fmt: (texts[fmt][0], texts[fmt][1]()) for fmt in formats}
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, text in rendered.values():
        p = out / name
        p.write_text(text)
        paths.append(p)
    return paths
