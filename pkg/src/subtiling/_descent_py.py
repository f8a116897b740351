"""Reference implementation of the hierarchical cube descent.

The compiled kernel in `_descent_cy` mirrors this file operation for
operation (same traversal order, same floating-point expressions), so the
two produce bit-identical results; keep them in lockstep when editing.

Tile supports must be unions of axis-aligned boxes and the query domain an
axis-aligned cube. Descent from the root supertile classifies each node:
fully inside nodes are counted at their order and not subdivided, fully
outside nodes are dropped, and crossing nodes are subdivided down to
`min_order`, where their exact clip volumes are accumulated per type.
"""


def cube_profile(
    d,
    m,
    lam,
    piece_start,
    piece_lo0,
    piece_hi0,
    piece_lo1,
    piece_hi1,
    child_start,
    child_type,
    child_off0,
    child_off1,
    root_type,
    root_order,
    root_ox,
    root_oy,
    dlo0,
    dhi0,
    dlo1,
    dhi1,
    min_order,
    geps,
    max_nodes,
):
    """Returns (counts, front_vol, front_cnt) as plain Python containers:
    counts[k][t] inside supertiles, front_vol[t] crossing clip volume and
    front_cnt[t] crossing tile count at order `min_order`."""
    steps = [1.0] * (root_order + 1)
    for k in range(1, root_order + 1):
        steps[k] = steps[k - 1] * lam

    counts = [[0] * m for _ in range(root_order + 1)]
    front_vol = [0.0] * m
    front_cnt = [0] * m

    stk_t = [root_type]
    stk_k = [root_order]
    stk_x = [root_ox]
    stk_y = [root_oy]
    visited = 0

    while stk_t:
        t = stk_t.pop()
        k = stk_k.pop()
        ox = stk_x.pop()
        oy = stk_y.pop()
        visited += 1
        if visited > max_nodes:
            raise RuntimeError("descent exceeded its node budget")
        s = steps[k]

        all_in = True
        all_out = True
        p0 = piece_start[t]
        p1 = piece_start[t + 1]
        if d == 1:
            for p in range(p0, p1):
                plo = piece_lo0[p] * s + ox
                phi = piece_hi0[p] * s + ox
                if not (plo >= dlo0 - geps and phi <= dhi0 + geps):
                    all_in = False
                if not (phi <= dlo0 + geps or plo >= dhi0 - geps):
                    all_out = False
                if not (all_in or all_out):
                    break
        else:
            for p in range(p0, p1):
                plo0 = piece_lo0[p] * s + ox
                phi0 = piece_hi0[p] * s + ox
                plo1 = piece_lo1[p] * s + oy
                phi1 = piece_hi1[p] * s + oy
                if not (
                    plo0 >= dlo0 - geps
                    and phi0 <= dhi0 + geps
                    and plo1 >= dlo1 - geps
                    and phi1 <= dhi1 + geps
                ):
                    all_in = False
                if not (
                    phi0 <= dlo0 + geps
                    or plo0 >= dhi0 - geps
                    or phi1 <= dlo1 + geps
                    or plo1 >= dhi1 - geps
                ):
                    all_out = False
                if not (all_in or all_out):
                    break

        if all_in:
            counts[k][t] += 1
            continue
        if all_out:
            continue
        if k > min_order:
            st = steps[k - 1]
            c0 = child_start[t]
            c1 = child_start[t + 1]
            for c in range(c0, c1):
                stk_t.append(child_type[c])
                stk_k.append(k - 1)
                stk_x.append(ox + st * child_off0[c])
                stk_y.append(oy + st * child_off1[c])
        else:
            front_cnt[t] += 1
            v = 0.0
            if d == 1:
                for p in range(p0, p1):
                    plo = piece_lo0[p] * s + ox
                    phi = piece_hi0[p] * s + ox
                    a = plo if plo > dlo0 else dlo0
                    b = phi if phi < dhi0 else dhi0
                    if b > a:
                        v += b - a
            else:
                for p in range(p0, p1):
                    plo0 = piece_lo0[p] * s + ox
                    phi0 = piece_hi0[p] * s + ox
                    plo1 = piece_lo1[p] * s + oy
                    phi1 = piece_hi1[p] * s + oy
                    a0 = plo0 if plo0 > dlo0 else dlo0
                    b0 = phi0 if phi0 < dhi0 else dhi0
                    a1 = plo1 if plo1 > dlo1 else dlo1
                    b1 = phi1 if phi1 < dhi1 else dhi1
                    if b0 > a0 and b1 > a1:
                        v += (b0 - a0) * (b1 - a1)
            front_vol[t] += v

    return counts, front_vol, front_cnt
