# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled slot loop.

Operation-for-operation mirror of _kernel_py.run_slots; see that module
for the accumulator layouts. Integer state only, so results match the
pure-Python kernel bit for bit.
"""

import numpy as np


def run_slots(
    long long slots, long long warmup, long long batch_len, long long n_batches,
    double[::1] gen_u, double[::1] adm_u, double[::1] link_u,
    long long[::1] dur1, long long[::1] dur2,
    double g1, double g12, double eta1, double eta2,
    double thr1, double thr2, int draw_mode,
    long long nreq1, long long nreq2, long long capacity, int pre_departure,
    long long[:, ::1] batch_acc, long long[::1] totals, long long[::1] xstats,
):
    dep1_arr = np.zeros(slots + 1, dtype=np.int64)
    dep2_arr = np.zeros(slots + 1, dtype=np.int64)
    gendep1_arr = np.zeros(slots + 1, dtype=np.int64)
    gendep2_arr = np.zeros(slots + 1, dtype=np.int64)
    cdef long long[::1] dep1 = dep1_arr
    cdef long long[::1] dep2 = dep2_arr
    cdef long long[::1] gendep1 = gendep1_arr
    cdef long long[::1] gendep2 = gendep2_arr

    cdef long long units = 0
    cdef long long last_gen1 = 0
    cdef long long last_gen2 = 0
    cdef long long last_recv = 0
    cdef long long prev_x1 = -1
    cdef long long prev_x2 = -1
    cdef long long t, b, d, s, gap
    cdef double u
    cdef bint meas, ok

    for t in range(slots):
        meas = t >= warmup
        b = 0
        if meas:
            b = (t - warmup) // batch_len
            if b >= n_batches:
                b = n_batches - 1
            batch_acc[b, 0] += t - last_gen1
            batch_acc[b, 1] += t - last_gen2
            batch_acc[b, 2] += t - last_recv

        if not pre_departure:
            d = dep1[t]
            if d:
                units -= nreq1 * d
                totals[10] += d
                if gendep1[t] > last_gen1:
                    last_gen1 = gendep1[t]
                if meas:
                    batch_acc[b, 13] += d
                    if prev_x1 >= warmup:
                        gap = t - prev_x1
                        xstats[0] += d
                        xstats[1] += gap
                        xstats[2] += gap * gap
                    else:
                        xstats[0] += d - 1
                prev_x1 = t
            d = dep2[t]
            if d:
                units -= nreq2 * d
                totals[11] += d
                if gendep2[t] > last_gen2:
                    last_gen2 = gendep2[t]
                if meas:
                    batch_acc[b, 14] += d
                    if prev_x2 >= warmup:
                        gap = t - prev_x2
                        xstats[3] += d
                        xstats[4] += gap
                        xstats[5] += gap * gap
                    else:
                        xstats[3] += d - 1
                prev_x2 = t

        u = gen_u[t]
        if u < g1:
            totals[0] += 1
            if meas:
                batch_acc[b, 3] += 1
            if adm_u[t] < eta1:
                if draw_mode:
                    ok = link_u[t] >= thr1
                else:
                    ok = link_u[t] < thr1
                if ok:
                    totals[12] += 1
                    last_recv = t
                    if meas:
                        batch_acc[b, 15] += 1
                    if units + nreq1 <= capacity:
                        units += nreq1
                        totals[8] += 1
                        if meas:
                            batch_acc[b, 11] += 1
                        s = t + dur1[t]
                        if s < slots:
                            dep1[s] += 1
                            if t > gendep1[s]:
                                gendep1[s] = t
                    else:
                        totals[6] += 1
                        if meas:
                            batch_acc[b, 9] += 1
                else:
                    totals[4] += 1
                    if meas:
                        batch_acc[b, 7] += 1
            else:
                totals[2] += 1
                if meas:
                    batch_acc[b, 5] += 1
        elif u < g12:
            totals[1] += 1
            if meas:
                batch_acc[b, 4] += 1
            if adm_u[t] < eta2:
                if draw_mode:
                    ok = link_u[t] >= thr2
                else:
                    ok = link_u[t] < thr2
                if ok:
                    totals[12] += 1
                    last_recv = t
                    if meas:
                        batch_acc[b, 15] += 1
                    if units + nreq2 <= capacity:
                        units += nreq2
                        totals[9] += 1
                        if meas:
                            batch_acc[b, 12] += 1
                        s = t + dur2[t]
                        if s < slots:
                            dep2[s] += 1
                            if t > gendep2[s]:
                                gendep2[s] = t
                    else:
                        totals[7] += 1
                        if meas:
                            batch_acc[b, 10] += 1
                else:
                    totals[5] += 1
                    if meas:
                        batch_acc[b, 8] += 1
            else:
                totals[3] += 1
                if meas:
                    batch_acc[b, 6] += 1

        if pre_departure:
            d = dep1[t]
            if d:
                units -= nreq1 * d
                totals[10] += d
                if gendep1[t] > last_gen1:
                    last_gen1 = gendep1[t]
                if meas:
                    batch_acc[b, 13] += d
                    if prev_x1 >= warmup:
                        gap = t - prev_x1
                        xstats[0] += d
                        xstats[1] += gap
                        xstats[2] += gap * gap
                    else:
                        xstats[0] += d - 1
                prev_x1 = t
            d = dep2[t]
            if d:
                units -= nreq2 * d
                totals[11] += d
                if gendep2[t] > last_gen2:
                    last_gen2 = gendep2[t]
                if meas:
                    batch_acc[b, 14] += d
                    if prev_x2 >= warmup:
                        gap = t - prev_x2
                        xstats[3] += d
                        xstats[4] += gap
                        xstats[5] += gap * gap
                    else:
                        xstats[3] += d - 1
                prev_x2 = t

        if units > capacity or units < 0:
            return 1

    return 0
