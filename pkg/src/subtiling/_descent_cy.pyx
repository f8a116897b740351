# cython: language_level=3
"""Compiled twin of `_descent_py.cube_profile`.

Same traversal order and the same floating-point expressions as the pure
version, so results are bit-identical (the build disables FP contraction to
keep it that way); keep the two files in lockstep when editing.
"""

import numpy as np


def cube_profile(
    int d,
    int m,
    double lam,
    long long[::1] piece_start,
    double[::1] piece_lo0,
    double[::1] piece_hi0,
    double[::1] piece_lo1,
    double[::1] piece_hi1,
    long long[::1] child_start,
    long long[::1] child_type,
    double[::1] child_off0,
    double[::1] child_off1,
    int root_type,
    int root_order,
    double root_ox,
    double root_oy,
    double dlo0,
    double dhi0,
    double dlo1,
    double dhi1,
    int min_order,
    double geps,
    long long max_nodes,
):
    cdef int K = root_order
    steps_np = np.empty(K + 1, dtype=np.float64)
    cdef double[::1] steps = steps_np
    cdef int k
    steps[0] = 1.0
    for k in range(1, K + 1):
        steps[k] = steps[k - 1] * lam

    counts_np = np.zeros((K + 1, m), dtype=np.int64)
    front_vol_np = np.zeros(m, dtype=np.float64)
    front_cnt_np = np.zeros(m, dtype=np.int64)
    cdef long long[:, ::1] counts = counts_np
    cdef double[::1] front_vol = front_vol_np
    cdef long long[::1] front_cnt = front_cnt_np

    cdef int t
    cdef long long maxkid = 1, width
    for t in range(m):
        width = child_start[t + 1] - child_start[t]
        if width > maxkid:
            maxkid = width
    cdef long long cap = (<long long> K + 2) * maxkid + 8

    stk_t_np = np.empty(cap, dtype=np.int64)
    stk_k_np = np.empty(cap, dtype=np.int64)
    stk_x_np = np.empty(cap, dtype=np.float64)
    stk_y_np = np.empty(cap, dtype=np.float64)
    cdef long long[::1] stk_t = stk_t_np
    cdef long long[::1] stk_k = stk_k_np
    cdef double[::1] stk_x = stk_x_np
    cdef double[::1] stk_y = stk_y_np

    cdef long long top = 0
    stk_t[0] = root_type
    stk_k[0] = root_order
    stk_x[0] = root_ox
    stk_y[0] = root_oy
    top = 1

    cdef long long visited = 0
    cdef bint all_in, all_out
    cdef long long p, p0, p1, c, c0, c1
    cdef int kk, tt
    cdef double s, st, ox, oy, v
    cdef double plo, phi, plo0, phi0, plo1, phi1, a, b, a0, b0, a1, b1

    while top > 0:
        top -= 1
        tt = <int> stk_t[top]
        kk = <int> stk_k[top]
        ox = stk_x[top]
        oy = stk_y[top]
        visited += 1
        if visited > max_nodes:
            raise RuntimeError("descent exceeded its node budget")
        s = steps[kk]

        all_in = True
        all_out = True
        p0 = piece_start[tt]
        p1 = piece_start[tt + 1]
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
            counts[kk, tt] += 1
            continue
        if all_out:
            continue
        if kk > min_order:
            st = steps[kk - 1]
            c0 = child_start[tt]
            c1 = child_start[tt + 1]
            for c in range(c0, c1):
                stk_t[top] = child_type[c]
                stk_k[top] = kk - 1
                stk_x[top] = ox + st * child_off0[c]
                stk_y[top] = oy + st * child_off1[c]
                top += 1
        else:
            front_cnt[tt] += 1
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
            front_vol[tt] += v

    return counts_np, front_vol_np, front_cnt_np
