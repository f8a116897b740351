"""SVG output for substitution patches.

Plain string assembly, no drawing library. Tiles are filled by type with
a small colorblind-aware palette; multi-piece tiles (the chair's three
squares, say) are merged into one outline by cancelling shared edges, so
the drawn shape is the actual tile, not its convex pieces. Supertile
boundaries for any lower orders can be overlaid to show the hierarchy.
One-dimensional systems render as a horizontal bar.
"""

from xml.sax.saxutils import escape

from .errors import FormatError
from .geometry import _piece_poly_verts
from .systems import PlacedTile, generate_patch

PALETTE = (
    "#4477aa",
    "#ee6677",
    "#228833",
    "#ccbb44",
    "#66ccee",
    "#aa3377",
    "#bbbbbb",
    "#999933",
)


def _outline_loops(pieces):
    """Boundary loops of a union of polygons sharing whole edges.

    Directed edges that appear in both orientations are interior and
    cancel; the survivors are chained into closed loops. Returns None
    when the pieces do not share exact full edges (the caller then draws
    pieces one by one, seams and all).
    """
    edges = {}
    for p in pieces:
        verts = [tuple(v) for v in _piece_poly_verts(p)]
        for a, b in zip(verts, verts[1:] + verts[:1]):
            if (b, a) in edges:
                edges.pop((b, a))
            elif (a, b) in edges:
                return None
            else:
                edges[(a, b)] = True
    start_of = {}
    for a, b in edges:
        if a in start_of:
            return None
        start_of[a] = b
    loops = []
    while start_of:
        a0 = next(iter(start_of))
        loop = [a0]
        nxt = start_of.pop(a0)
        while nxt != a0:
            loop.append(nxt)
            if nxt not in start_of:
                return None
            nxt = start_of.pop(nxt)
        loops.append(loop)
    return loops


def _path_of(loops, flip):
    cmds = []
    for loop in loops:
        pts = [f"{x:.8g},{flip - y:.8g}" for x, y in loop]
        cmds.append("M" + " L".join(pts) + " Z")
    return " ".join(cmds)


def _tile_paths(system, tiles, flip):
    for t in tiles:
        pieces = t.support(system)
        loops = _outline_loops(pieces)
        if loops is None:
            loops = [[tuple(v) for v in _piece_poly_verts(p)] for p in pieces]
        yield t, _path_of(loops, flip)


def _supertiles_at(system, root, order):
    out = []
    stack = [root]
    while stack:
        t = stack.pop()
        if t.order == order:
            out.append(t)
        else:
            stack.extend(t.children(system))
    return out


def patch_svg(system, type_index, order, outline_orders=(), max_tiles=1_000_000):
    """SVG text for the order-`order` supertile of one type at the origin."""
    if not 0 <= type_index < system.m:
        raise FormatError(f"type index {type_index} out of range")
    outline_orders = sorted(set(int(k) for k in outline_orders))
    if outline_orders and not 0 < outline_orders[0] <= outline_orders[-1] <= order:
        raise FormatError("outline orders must lie in [1, patch order]")
    patch = generate_patch(system, type_index, order, max_tiles=max_tiles)
    if system.d == 1:
        return _bar_svg(system, patch)
    lo0 = min(p.lo[0] for t in patch.tiles for p in t.support(system))
    lo1 = min(p.lo[1] for t in patch.tiles for p in t.support(system))
    hi0 = max(p.hi[0] for t in patch.tiles for p in t.support(system))
    hi1 = max(p.hi[1] for t in patch.tiles for p in t.support(system))
    w, h = hi0 - lo0, hi1 - lo1
    pad = 0.02 * max(w, h)
    flip = lo1 + hi1
    sw = max(w, h) / 600.0
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="{lo0 - pad:.8g} {lo1 - pad:.8g} {w + 2 * pad:.8g} {h + 2 * pad:.8g}" '
        f'width="800" height="{800.0 * (h + 2 * pad) / (w + 2 * pad):.6g}">',
        f"<title>{escape(system.name)}: type {escape(system.prototiles[type_index].name)}, "
        f"order {order}, {len(patch.tiles)} tiles</title>",
        f'<g stroke="#1c1c1c" stroke-width="{sw:.8g}" stroke-linejoin="round">',
    ]
    for t, path in _tile_paths(system, patch.tiles, flip):
        color = PALETTE[t.type % len(PALETTE)]
        out.append(f'<path d="{path}" fill="{color}" fill-rule="evenodd"/>')
    out.append("</g>")
    root = PlacedTile(int(type_index), int(order), (0.0,) * system.d)
    for k in outline_orders:
        ow = sw * (2.0 + 2.0 * k)
        out.append(
            f'<g fill="none" stroke="#000000" stroke-width="{ow:.8g}" '
            f'stroke-linejoin="round">'
        )
        for st in _supertiles_at(system, root, k):
            loops = _outline_loops(st.support(system))
            if loops is None:
                loops = [
                    [tuple(v) for v in _piece_poly_verts(p)]
                    for p in st.support(system)
                ]
            out.append(f'<path d="{_path_of(loops, flip)}"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _bar_svg(system, patch):
    lo = min(p.lo[0] for t in patch.tiles for p in t.support(system))
    hi = max(p.hi[0] for t in patch.tiles for p in t.support(system))
    w = hi - lo
    bar = 0.08 * w
    pad = 0.02 * w
    sw = w / 1200.0
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="{lo - pad:.8g} {-pad:.8g} {w + 2 * pad:.8g} {bar + 2 * pad:.8g}" '
        f'width="1000" height="{1000.0 * (bar + 2 * pad) / (w + 2 * pad):.6g}">',
        f"<title>{escape(system.name)}: {len(patch.tiles)} tiles</title>",
        f'<g stroke="#1c1c1c" stroke-width="{sw:.8g}">',
    ]
    for t in patch.tiles:
        for p in t.support(system):
            a, b = float(p.lo[0]), float(p.hi[0])
            color = PALETTE[t.type % len(PALETTE)]
            out.append(
                f'<rect x="{a:.8g}" y="0" width="{b - a:.8g}" '
                f'height="{bar:.8g}" fill="{color}"/>'
            )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
