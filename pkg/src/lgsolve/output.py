"""CSV, SVG and JSON emitters.  All outputs are byte-deterministic for fixed input."""
from __future__ import annotations

import csv
import dataclasses
import enum
import json
import math
from xml.sax.saxutils import escape

import numpy as np
import shapely

__all__ = ["grid_points", "write_field_csv", "emit_levels_svg", "to_jsonable", "write_json"]


def grid_points(domain, n=50, box=None):
    """Midpoints of an ``n x n`` grid over ``box`` (default: the domain bounds) inside the domain."""
    x0, y0, x1, y1 = domain.bounds() if box is None else box
    xs = x0 + (np.arange(n) + 0.5) * (x1 - x0) / n
    ys = y0 + (np.arange(n) + 0.5) * (y1 - y0) / n
    X, Y = np.meshgrid(xs, ys)
    P = np.stack([X.ravel(), Y.ravel()], axis=-1)
    return P[domain.contains(P, closed=False)]


def write_field_csv(path, points, values):
    """Rows ``x,y,u`` with 12 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "u"])
        for (x, y), u in zip(np.asarray(points, float), np.asarray(values, float)):
            w.writerow([f"{x:.12g}", f"{y:.12g}", f"{u:.12g}"])


def _colour(frac):
    # blue -> red
    r = int(round(40 + 200 * frac))
    b = int(round(240 - 200 * frac))
    return f"#{r:02x}50{b:02x}"


def emit_levels_svg(field_, path, view=None, size=600, every=1, title=None):
    """Chords of every ``every``-th level over the domain outline.

    ``view`` is a box ``(x0, y0, x1, y1)``; chords and the outline are clipped
    to it.  Chords crossing the slab depth of a truncated domain (escapes) get
    an arrow marker at their far end.
    """
    levels = getattr(field_, "levels", None)
    if not levels and getattr(field_, "constant", None) is None:
        raise ValueError("empty level family")
    domain = field_.domain
    outline = shapely.Polygon(domain.vertices)
    box = shapely.box(*(view if view is not None else domain.bounds()))
    x0, y0, x1, y1 = box.bounds
    span = max(x1 - x0, y1 - y0)
    pad = 0.04 * span
    scale = size / (span + 2 * pad)
    W = (x1 - x0 + 2 * pad) * scale
    H = (y1 - y0 + 2 * pad) * scale

    def tx(p):
        return (p[0] - x0 + pad) * scale, (y1 + pad - p[1]) * scale

    def pts_attr(coords):
        return " ".join(f"{a:.3f},{b:.3f}" for a, b in (tx(c) for c in coords))

    halfplane = getattr(domain, "halfplane", None)
    M = getattr(domain, "M", None)
    lines = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W:.1f}" height="{H:.1f}" '
        f'viewBox="0 0 {W:.3f} {H:.3f}">',
        '<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="6" markerHeight="6" '
        'orient="auto"><path d="M0,0 L10,5 L0,10 z" fill="#000"/></marker></defs>',
    ]
    if title:
        lines.append(f"<title>{escape(title)}</title>")
    clip = shapely.intersection(outline, box)
    for poly in getattr(clip, "geoms", [clip]):
        if poly.geom_type == "Polygon" and not poly.is_empty:
            lines.append(f'<polygon id="domain" points="{pts_attr(np.asarray(poly.exterior.coords))}" '
                         'fill="#f4f4f4" stroke="#000" stroke-width="1.5"/>')
    t = np.array([lv.t for lv in levels]) if levels else np.zeros(0)
    lo, hi = (float(t.min()), float(t.max())) if len(t) else (0.0, 1.0)
    for k in range(0, len(levels), every):
        lv = levels[k]
        frac = 0.5 if hi == lo else (lv.t - lo) / (hi - lo)
        segs = []
        for i, j in lv.pairs:
            p, q = lv.points[i], lv.points[j]
            esc = False
            if halfplane is not None:
                dp, dq = float(halfplane.depth(p)), float(halfplane.depth(q))
                esc = (dp > M) != (dq > M)
                if esc and dp > M:
                    p, q = q, p
            seg = shapely.intersection(shapely.LineString([p, q]), box)
            if seg.is_empty or seg.geom_type != "LineString":
                continue
            marker = ' marker-end="url(#arrow)"' if esc else ""
            segs.append(f'<polyline points="{pts_attr(np.asarray(seg.coords))}" fill="none"{marker}/>')
        if segs:
            lines.append(f'<g class="level" data-t="{lv.t:.6g}" stroke="{_colour(frac)}" stroke-width="1">')
            lines.extend(segs)
            lines.append("</g>")
    ly = 14.0
    lines.append(f'<g id="legend" font-family="monospace" font-size="11">'
                 f'<text x="6" y="{ly:.1f}">levels {len(levels)}: t in [{lo:.4g}, {hi:.4g}]</text>'
                 f'<rect x="6" y="{ly + 4:.1f}" width="10" height="6" fill="{_colour(0.0)}"/>'
                 f'<text x="20" y="{ly + 10:.1f}">low</text>'
                 f'<rect x="50" y="{ly + 4:.1f}" width="10" height="6" fill="{_colour(1.0)}"/>'
                 f'<text x="64" y="{ly + 10:.1f}">high</text></g>')
    lines.append("</svg>")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays, dataclasses and enums."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, enum.Enum):
        return obj.name
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        d = {"type": type(obj).__name__}
        d.update({f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)})
        return d
    return obj


def write_json(path, report):
    with open(path, "w") as fh:
        json.dump(to_jsonable(report), fh, indent=2, sort_keys=True)
        fh.write("\n")
