"""Pure-Python slot loop, the fallback when the compiled kernel is absent.

Must stay operation-for-operation identical to _kernel.pyx: both read the
same pregenerated draw arrays and accumulate in integers only, so a run
produces bit-identical results on either kernel.

Batch accumulator layout (int64, one row per batch):
  0 age1  1 age2  2 aoi  3 gen1  4 gen2  5 rej1  6 rej2  7 upl1  8 upl2
  9 blk1  10 blk2  11 adm1  12 adm2  13 exe1  14 exe2  15 recv
Totals layout (whole run, for the conservation ledger):
  0 gen1 1 gen2 2 rej1 3 rej2 4 upl1 5 upl2 6 blk1 7 blk2 8 adm1 9 adm2
  10 exe1 11 exe2 12 recv
Inter-execution stats (post-warmup):
  0 x1_n 1 x1_sum 2 x1_sumsq 3 x2_n 4 x2_sum 5 x2_sumsq
"""


def run_slots(
    slots, warmup, batch_len, n_batches,
    gen_u, adm_u, link_u, dur1, dur2,
    g1, g12, eta1, eta2, thr1, thr2, draw_mode,
    nreq1, nreq2, capacity, pre_departure,
    batch_acc, totals, xstats,
):
    gen = gen_u.tolist()
    adm = adm_u.tolist()
    link = link_u.tolist()
    d1 = dur1.tolist()
    d2 = dur2.tolist()
    dep1 = [0] * (slots + 1)
    dep2 = [0] * (slots + 1)
    gendep1 = [0] * (slots + 1)
    gendep2 = [0] * (slots + 1)
    acc = [[0] * 16 for _ in range(n_batches)]
    tot = [0] * 13
    xs = [0] * 6

    units = 0
    last_gen1 = 0
    last_gen2 = 0
    last_recv = 0
    prev_x1 = -1
    prev_x2 = -1

    for t in range(slots):
        meas = t >= warmup
        if meas:
            b = (t - warmup) // batch_len
            if b >= n_batches:
                b = n_batches - 1
            row = acc[b]
            row[0] += t - last_gen1
            row[1] += t - last_gen2
            row[2] += t - last_recv
        else:
            row = None

        if not pre_departure:
            d = dep1[t]
            if d:
                units -= nreq1 * d
                tot[10] += d
                if gendep1[t] > last_gen1:
                    last_gen1 = gendep1[t]
                if meas:
                    row[13] += d
                    if prev_x1 >= warmup:
                        gap = t - prev_x1
                        xs[0] += d
                        xs[1] += gap
                        xs[2] += gap * gap
                    else:
                        xs[0] += d - 1
                prev_x1 = t
            d = dep2[t]
            if d:
                units -= nreq2 * d
                tot[11] += d
                if gendep2[t] > last_gen2:
                    last_gen2 = gendep2[t]
                if meas:
                    row[14] += d
                    if prev_x2 >= warmup:
                        gap = t - prev_x2
                        xs[3] += d
                        xs[4] += gap
                        xs[5] += gap * gap
                    else:
                        xs[3] += d - 1
                prev_x2 = t

        u = gen[t]
        if u < g1:
            tot[0] += 1
            if meas:
                row[3] += 1
            if adm[t] < eta1:
                if (link[t] >= thr1) if draw_mode else (link[t] < thr1):
                    tot[12] += 1
                    last_recv = t
                    if meas:
                        row[15] += 1
                    if units + nreq1 <= capacity:
                        units += nreq1
                        tot[8] += 1
                        if meas:
                            row[11] += 1
                        s = t + d1[t]
                        if s < slots:
                            dep1[s] += 1
                            if t > gendep1[s]:
                                gendep1[s] = t
                    else:
                        tot[6] += 1
                        if meas:
                            row[9] += 1
                else:
                    tot[4] += 1
                    if meas:
                        row[7] += 1
            else:
                tot[2] += 1
                if meas:
                    row[5] += 1
        elif u < g12:
            tot[1] += 1
            if meas:
                row[4] += 1
            if adm[t] < eta2:
                if (link[t] >= thr2) if draw_mode else (link[t] < thr2):
                    tot[12] += 1
                    last_recv = t
                    if meas:
                        row[15] += 1
                    if units + nreq2 <= capacity:
                        units += nreq2
                        tot[9] += 1
                        if meas:
                            row[12] += 1
                        s = t + d2[t]
                        if s < slots:
                            dep2[s] += 1
                            if t > gendep2[s]:
                                gendep2[s] = t
                    else:
                        tot[7] += 1
                        if meas:
                            row[10] += 1
                else:
                    tot[5] += 1
                    if meas:
                        row[8] += 1
            else:
                tot[3] += 1
                if meas:
                    row[6] += 1

        if pre_departure:
            d = dep1[t]
            if d:
                units -= nreq1 * d
                tot[10] += d
                if gendep1[t] > last_gen1:
                    last_gen1 = gendep1[t]
                if meas:
                    row[13] += d
                    if prev_x1 >= warmup:
                        gap = t - prev_x1
                        xs[0] += d
                        xs[1] += gap
                        xs[2] += gap * gap
                    else:
                        xs[0] += d - 1
                prev_x1 = t
            d = dep2[t]
            if d:
                units -= nreq2 * d
                tot[11] += d
                if gendep2[t] > last_gen2:
                    last_gen2 = gendep2[t]
                if meas:
                    row[14] += d
                    if prev_x2 >= warmup:
                        gap = t - prev_x2
                        xs[3] += d
                        xs[4] += gap
                        xs[5] += gap * gap
                    else:
                        xs[3] += d - 1
                prev_x2 = t

        if units > capacity or units < 0:
            return 1

    for b in range(n_batches):
        src = acc[b]
        for f in range(16):
            batch_acc[b, f] = src[f]
    for f in range(13):
        totals[f] = tot[f]
    for f in range(6):
        xstats[f] = xs[f]
    return 0
