"""Pure-Python (numpy) implementations of the hot kernels.

Every function here has a twin in ``_ckernels.pyx`` with the same signature
and the same floating-point operation order, so the two backends return
identical results.  Array arguments:

``sums``
    (6, n+1) prefix sums as built by :class:`shapemine.signal.PrefixSums`.
``t``, ``v``
    raw sample times and values.
``boxes``
    (P, 6) float array of ``a_lo, a_hi, b_lo, b_hi, d_lo, d_hi`` per position.
``follow``
    (P+1, P+1) uint8 matrix; row 0 is the initial state, column 0 unused.
"""
import numpy as np

INF = float("inf")


def _row_stats(sums, t, v, t_shift, v_shift, lo, j):
    """Centered OLS statistics for ranges ``i..j`` with ``lo <= i < j``."""
    n = sums[0, j + 1] - sums[0, lo:j]
    st = sums[1, j + 1] - sums[1, lo:j]
    stt = sums[2, j + 1] - sums[2, lo:j]
    sv = sums[3, j + 1] - sums[3, lo:j]
    svv = sums[4, j + 1] - sums[4, lo:j]
    stv = sums[5, j + 1] - sums[5, lo:j]
    mt = st / n
    mv = sv / n
    sxx = stt - st * mt
    sxy = stv - st * mv
    syy = svv - sv * mv
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(sxx > 0.0, sxy / sxx, 0.0)
    mse = (syy - a * sxy) / n
    mse = np.where(mse < 0.0, 0.0, mse)
    mse = np.where(n == 2.0, 0.0, mse)
    return n, a, mse, sxx, sxy, syy, mt, mv


def row_mse(sums, t, v, t_shift, v_shift, j):
    """MSE of the OLS line over ``i..j`` for every ``i < j``."""
    return _row_stats(sums, t, v, t_shift, v_shift, 0, j)[2]


def min_count_dp(sums, t, v, t_shift, v_shift, eps):
    """Predecessor array of the min-count segmentation (count, then total MSE)."""
    n = t.size
    count = np.zeros(n, dtype=np.int64)
    total = np.zeros(n, dtype=np.float64)
    prev = np.full(n, -1, dtype=np.int64)
    for j in range(1, n):
        mse = row_mse(sums, t, v, t_shift, v_shift, j)
        ok = np.flatnonzero(mse <= eps)
        c = count[ok] + 1
        best_c = c.min()
        ok = ok[c == best_c]
        tot = total[ok] + mse[ok]
        k = int(np.argmin(tot))
        prev[j] = ok[k]
        count[j] = best_c
        total[j] = tot[k]
    return prev


def fixed_count_dp(sums, t, v, t_shift, v_shift, m):
    """Cut indices of the m-segment segmentation minimizing the largest MSE."""
    n = t.size
    f = np.full((m + 1, n), INF)
    arg = np.full((m + 1, n), -1, dtype=np.int64)
    for j in range(1, n):
        mse = row_mse(sums, t, v, t_shift, v_shift, j)
        f[1, j] = mse[0]
        arg[1, j] = 0
        for k in range(2, min(m, j) + 1):
            cand = np.maximum(f[k - 1, k - 1:j], mse[k - 1:j])
            i = int(np.argmin(cand))
            f[k, j] = cand[i]
            arg[k, j] = i + k - 1
    cuts = [n - 1]
    j = n - 1
    for k in range(m, 0, -1):
        j = int(arg[k, j])
        cuts.append(j)
    return np.array(cuts[::-1], dtype=np.int64), float(f[m, n - 1])


def _clamp(x, lo, hi):
    return np.minimum(np.maximum(x, lo), hi)


def _objective(a, b, n, sxx, sxy, syy, tbar, vbar):
    r = vbar - a * tbar - b
    f = (syy - 2.0 * a * sxy + a * a * sxx) / n + r * r
    return np.where(f < 0.0, 0.0, f)


def constrained_row(sums, t, v, t_shift, v_shift, i, j_lo, j_hi, box):
    """Box-constrained fits of ranges ``i..j`` for ``j_lo <= j < j_hi``.

    Returns arrays ``(a, b, mse)``.
    """
    a_lo, a_hi, b_lo, b_hi = box[0], box[1], box[2], box[3]
    js = np.arange(j_lo, j_hi)
    n = sums[0, js + 1] - sums[0, i]
    st = sums[1, js + 1] - sums[1, i]
    stt = sums[2, js + 1] - sums[2, i]
    sv = sums[3, js + 1] - sums[3, i]
    svv = sums[4, js + 1] - sums[4, i]
    stv = sums[5, js + 1] - sums[5, i]
    single = n == 1.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        mt = st / n
        mv = sv / n
        sxx = stt - st * mt
        sxy = stv - st * mv
        syy = svv - sv * mv
        a0 = np.where(sxx > 0.0, sxy / sxx, 0.0)
        tc_i = t[i] - t_shift
        tbar = mt - tc_i
        vbar = mv + v_shift
        mse0 = (syy - a0 * sxy) / n
        mse0 = np.where(mse0 < 0.0, 0.0, mse0)
        mse0 = np.where(n == 2.0, 0.0, mse0)
        # single-sample ranges: a is free, the line passes through v_i
        vi = v[i]
        a0 = np.where(single, 0.0, a0)
        tbar = np.where(single, 0.0, tbar)
        vbar = np.where(single, vi, vbar)
        sxx = np.where(single, 0.0, sxx)
        sxy = np.where(single, 0.0, sxy)
        syy = np.where(single, 0.0, syy)
        mse0 = np.where(single, 0.0, mse0)
        b0 = vbar - a0 * tbar

        inside = (a0 >= a_lo) & (a0 <= a_hi) & (b0 >= b_lo) & (b0 <= b_hi)
        best_a = a0.copy()
        best_b = b0.copy()
        best_f = np.where(inside, mse0, INF)
        out = ~inside
        for fixed in (a_lo, a_hi):
            if not np.isfinite(fixed):
                continue
            ca = np.full_like(a0, fixed)
            cb = _clamp(vbar - ca * tbar, b_lo, b_hi)
            cf = _objective(ca, cb, n, sxx, sxy, syy, tbar, vbar)
            take = out & (cf < best_f)
            best_a = np.where(take, ca, best_a)
            best_b = np.where(take, cb, best_b)
            best_f = np.where(take, cf, best_f)
        for fixed in (b_lo, b_hi):
            if not np.isfinite(fixed):
                continue
            cb = np.full_like(a0, fixed)
            den = sxx + n * tbar * tbar
            ca = np.where(den > 0.0, (sxy + n * tbar * (vbar - cb)) / den, 0.0)
            ca = _clamp(ca, a_lo, a_hi)
            cf = _objective(ca, cb, n, sxx, sxy, syy, tbar, vbar)
            take = out & (cf < best_f)
            best_a = np.where(take, ca, best_a)
            best_b = np.where(take, cb, best_b)
            best_f = np.where(take, cf, best_f)
    return best_a, best_b, best_f


def constrained_fit(sums, t, v, t_shift, v_shift, i, j, box):
    a, b, f = constrained_row(sums, t, v, t_shift, v_shift, i, j, j + 1, box)
    return float(a[0]), float(b[0]), float(f[0])


def match_dp(sums, t, v, t_shift, v_shift, boxes, follow, nu):
    """Reachability over (sample index, Glushkov state).

    Returns ``(reached, pred_i, pred_s)``, each of shape (n, P+1).  State 0 is
    the initial state and is reached only at index 0.
    """
    n = t.size
    S = follow.shape[0]
    reached = np.zeros((n, S), dtype=np.uint8)
    pred_i = np.full((n, S), -1, dtype=np.int64)
    pred_s = np.full((n, S), -1, dtype=np.int64)
    reached[0, 0] = 1
    for i in range(n):
        if not reached[i].any():
            continue
        changed = True
        while changed:
            changed = False
            for s in range(S):
                if not reached[i, s]:
                    continue
                for q in range(1, S):
                    if not follow[s, q] or reached[i, q]:
                        continue
                    box = boxes[q - 1]
                    if not (box[4] <= 0.0 <= box[5]):
                        continue
                    if constrained_fit(sums, t, v, t_shift, v_shift, i, i, box)[2] <= nu:
                        reached[i, q] = 1
                        pred_i[i, q] = i
                        pred_s[i, q] = s
                        changed = True
        for q in range(1, S):
            src = -1
            for s in range(S):
                if reached[i, s] and follow[s, q]:
                    src = s
                    break
            if src < 0:
                continue
            box = boxes[q - 1]
            # searchsorted only bounds the scan; the duration mask below is exact
            j_hi = int(np.searchsorted(t, t[i] + box[5], side="right")) + 2 if np.isfinite(box[5]) else n
            j_hi = min(j_hi, n)
            if j_hi <= i + 1:
                continue
            _, _, f = constrained_row(sums, t, v, t_shift, v_shift, i, i + 1, j_hi, box)
            js = np.arange(i + 1, j_hi)
            dur = t[i + 1:j_hi] - t[i]
            hit = (dur >= box[4]) & (dur <= box[5]) & (f <= nu) & (reached[i + 1:j_hi, q] == 0)
            for j in js[hit]:
                reached[j, q] = 1
                pred_i[j, q] = i
                pred_s[j, q] = src
    return reached, pred_i, pred_s
