"""Level-set polylines of a scalar field sampled on a rectangular grid.

Marching squares with linear edge interpolation.  Ambiguous (saddle) cells
are resolved by evaluating the field at the cell centre.  When the field is
available as a function, every crossing is refined by bisection along its
cell edge so that vertices lie on the level set to near machine precision.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

Field = Callable[[np.ndarray, np.ndarray], np.ndarray]

# corner k of a cell touches these two edges (0=bottom, 1=right, 2=top, 3=left)
_CORNER_EDGES = {0: (0, 3), 1: (0, 1), 2: (1, 2), 3: (2, 3)}


def _edge_key(j: int, i: int, e: int) -> tuple[str, int, int]:
    # horizontal edge ("h", j, i) joins nodes (i, j)-(i+1, j); vertical ("v", j, i) joins (i, j)-(i, j+1)
    if e == 0:
        return ("h", j, i)
    if e == 2:
        return ("h", j + 1, i)
    if e == 3:
        return ("v", j, i)
    return ("v", j, i + 1)


def _cell_segments(above: tuple[bool, bool, bool, bool], center_above: bool | None):
    crossing = [e for e, (a, b) in enumerate([(0, 1), (1, 2), (3, 2), (0, 3)]) if above[a] != above[b]]
    if len(crossing) == 2:
        return [tuple(crossing)]
    if len(crossing) == 4:
        # saddle: cut off the two corners whose state differs from the centre
        cut = (1, 3) if center_above == above[0] else (0, 2)
        return [_CORNER_EDGES[c] for c in cut]
    return []


def _chain(segments: list[tuple]) -> list[list]:
    adj: dict = {}
    for a, b in segments:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    seen: set = set()
    lines = []

    def walk(start):
        line = [start]
        seen.add(start)
        prev, cur = None, start
        while True:
            nxt = [n for n in adj[cur] if n != prev and n not in seen]
            if not nxt:
                # close the loop if we came back around
                if len(line) > 2 and start in adj[cur] and prev != start:
                    line.append(start)
                return line
            prev, cur = cur, nxt[0]
            seen.add(cur)
            line.append(cur)

    # open polylines start at degree-1 nodes; sorted for a deterministic order
    for node in sorted(n for n, nb in adj.items() if len(nb) == 1):
        if node not in seen:
            lines.append(walk(node))
    for node in sorted(adj):
        if node not in seen:
            lines.append(walk(node))
    return lines


def find_contours(
    xs: np.ndarray,
    ys: np.ndarray,
    values: np.ndarray,
    level: float,
    field: Field | None = None,
    refine_iterations: int = 60,
) -> list[np.ndarray]:
    """Polylines where ``values`` crosses ``level``.

    ``values[j, i]`` is the field at ``(xs[i], ys[j])``.  Returns a list of
    ``(k, 2)`` arrays of ``(x, y)`` vertices.  With ``field`` given, saddles
    are decided by evaluating it at the cell centre and each vertex is
    bisected along its edge; otherwise the corner mean and linear
    interpolation are used.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    Z = np.asarray(values, dtype=float)
    if Z.shape != (len(ys), len(xs)):
        raise ValueError(f"values must have shape {(len(ys), len(xs))}, got {Z.shape}")
    above = Z >= level
    c0 = above[:-1, :-1]
    c1 = above[:-1, 1:]
    c2 = above[1:, 1:]
    c3 = above[1:, :-1]
    code = c0 * 1 + c1 * 2 + c2 * 4 + c3 * 8
    active = np.argwhere((code != 0) & (code != 15))
    if active.size == 0:
        return []

    saddles = [(j, i) for j, i in active if code[j, i] in (5, 10)]
    center_above = {}
    if saddles:
        sj = np.array([s[0] for s in saddles])
        si = np.array([s[1] for s in saddles])
        cx = 0.5 * (xs[si] + xs[si + 1])
        cy = 0.5 * (ys[sj] + ys[sj + 1])
        if field is not None:
            cv = np.asarray(field(cx, cy), dtype=float)
        else:
            cv = 0.25 * (Z[sj, si] + Z[sj, si + 1] + Z[sj + 1, si] + Z[sj + 1, si + 1])
        center_above = {s: bool(v >= level) for s, v in zip(saddles, cv)}

    segments = []
    for j, i in active:
        corners = (bool(c0[j, i]), bool(c1[j, i]), bool(c2[j, i]), bool(c3[j, i]))
        for ea, eb in _cell_segments(corners, center_above.get((j, i))):
            segments.append((_edge_key(j, i, ea), _edge_key(j, i, eb)))

    lines = _chain(segments)
    keys = sorted({k for line in lines for k in line})
    index = {k: n for n, k in enumerate(keys)}
    # edge endpoints: (x0, y0, z0) -> (x1, y1, z1)
    x0 = np.empty(len(keys))
    y0 = np.empty(len(keys))
    x1 = np.empty(len(keys))
    y1 = np.empty(len(keys))
    z0 = np.empty(len(keys))
    z1 = np.empty(len(keys))
    for n, (kind, j, i) in enumerate(keys):
        x0[n], y0[n], z0[n] = xs[i], ys[j], Z[j, i]
        if kind == "h":
            x1[n], y1[n], z1[n] = xs[i + 1], ys[j], Z[j, i + 1]
        else:
            x1[n], y1[n], z1[n] = xs[i], ys[j + 1], Z[j + 1, i]

    if field is None:
        frac = (level - z0) / (z1 - z0)
    else:
        # keep lo on the below-level side, hi on the above-level side
        lo = np.where(z0 < level, 0.0, 1.0)
        hi = 1.0 - lo
        for _ in range(refine_iterations):
            mid = 0.5 * (lo + hi)
            v = np.asarray(field(x0 + mid * (x1 - x0), y0 + mid * (y1 - y0)), dtype=float)
            below = v < level
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        frac = 0.5 * (lo + hi)
    frac = np.clip(frac, 0.0, 1.0)
    px = x0 + frac * (x1 - x0)
    py = y0 + frac * (y1 - y0)

    out = []
    for line in lines:
        idx = [index[k] for k in line]
        pts = np.column_stack([px[idx], py[idx]])
        if pts[0, 0] > pts[-1, 0]:
            pts = pts[::-1]
        out.append(pts)
    return out
