# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the kernels in ``_pykernels``.

Keep the arithmetic in the same order as the Python versions: the test
suite checks that both backends agree exactly.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY, isfinite

cnp.import_array()


cdef inline double _clamp(double x, double lo, double hi) noexcept nogil:
    if x < lo:
        x = lo
    if x > hi:
        x = hi
    return x


cdef inline double _range_mse(const double[:, ::1] s, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    cdef double n = s[0, j + 1] - s[0, i]
    cdef double st = s[1, j + 1] - s[1, i]
    cdef double stt = s[2, j + 1] - s[2, i]
    cdef double sv = s[3, j + 1] - s[3, i]
    cdef double svv = s[4, j + 1] - s[4, i]
    cdef double stv = s[5, j + 1] - s[5, i]
    cdef double mt, mv, sxx, sxy, syy, a, mse
    if n == 1.0 or n == 2.0:
        return 0.0
    mt = st / n
    mv = sv / n
    sxx = stt - st * mt
    sxy = stv - st * mv
    syy = svv - sv * mv
    a = sxy / sxx if sxx > 0.0 else 0.0
    mse = (syy - a * sxy) / n
    if mse < 0.0:
        mse = 0.0
    return mse


cdef inline double _objective(double a, double b, double n, double sxx, double sxy,
                              double syy, double tbar, double vbar) noexcept nogil:
    cdef double r = vbar - a * tbar - b
    cdef double f = (syy - 2.0 * a * sxy + a * a * sxx) / n + r * r
    if f < 0.0:
        f = 0.0
    return f


cdef double _constrained(const double[:, ::1] s, const double[::1] t, const double[::1] v,
                         double t_shift, double v_shift, Py_ssize_t i, Py_ssize_t j,
                         double a_lo, double a_hi, double b_lo, double b_hi,
                         double* out_a, double* out_b) noexcept nogil:
    cdef double n = s[0, j + 1] - s[0, i]
    cdef double st = s[1, j + 1] - s[1, i]
    cdef double stt = s[2, j + 1] - s[2, i]
    cdef double sv = s[3, j + 1] - s[3, i]
    cdef double svv = s[4, j + 1] - s[4, i]
    cdef double stv = s[5, j + 1] - s[5, i]
    cdef double mt, mv, sxx, sxy, syy, a0, b0, tbar, vbar, mse0
    cdef double best_a, best_b, best_f, ca, cb, cf, den, fixed
    cdef int e
    if n == 1.0:
        a0 = 0.0
        tbar = 0.0
        vbar = v[i]
        sxx = 0.0
        sxy = 0.0
        syy = 0.0
        mse0 = 0.0
    else:
        mt = st / n
        mv = sv / n
        sxx = stt - st * mt
        sxy = stv - st * mv
        syy = svv - sv * mv
        a0 = sxy / sxx if sxx > 0.0 else 0.0
        tbar = mt - (t[i] - t_shift)
        vbar = mv + v_shift
        mse0 = (syy - a0 * sxy) / n
        if mse0 < 0.0:
            mse0 = 0.0
        if n == 2.0:
            mse0 = 0.0
    b0 = vbar - a0 * tbar
    if a0 >= a_lo and a0 <= a_hi and b0 >= b_lo and b0 <= b_hi:
        out_a[0] = a0
        out_b[0] = b0
        return mse0
    best_a = a0
    best_b = b0
    best_f = INFINITY
    for e in range(2):
        fixed = a_lo if e == 0 else a_hi
        if not isfinite(fixed):
            continue
        ca = fixed
        cb = _clamp(vbar - ca * tbar, b_lo, b_hi)
        cf = _objective(ca, cb, n, sxx, sxy, syy, tbar, vbar)
        if cf < best_f:
            best_a = ca
            best_b = cb
            best_f = cf
    for e in range(2):
        fixed = b_lo if e == 0 else b_hi
        if not isfinite(fixed):
            continue
        cb = fixed
        den = sxx + n * tbar * tbar
        ca = (sxy + n * tbar * (vbar - cb)) / den if den > 0.0 else 0.0
        ca = _clamp(ca, a_lo, a_hi)
        cf = _objective(ca, cb, n, sxx, sxy, syy, tbar, vbar)
        if cf < best_f:
            best_a = ca
            best_b = cb
            best_f = cf
    out_a[0] = best_a
    out_b[0] = best_b
    return best_f


def row_mse(const double[:, ::1] sums, const double[::1] t, const double[::1] v,
            double t_shift, double v_shift, Py_ssize_t j):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(j, dtype=np.float64)
    cdef Py_ssize_t i
    for i in range(j):
        out[i] = _range_mse(sums, i, j)
    return out


def min_count_dp(const double[:, ::1] sums, const double[::1] t, const double[::1] v,
                 double t_shift, double v_shift, double eps):
    cdef Py_ssize_t n = t.shape[0]
    cdef Py_ssize_t i, j, bi
    cdef long long bc, c
    cdef double bt, tot, mse
    count_arr = np.zeros(n, dtype=np.int64)
    total_arr = np.zeros(n, dtype=np.float64)
    prev_arr = np.full(n, -1, dtype=np.int64)
    cdef long long[::1] count = count_arr
    cdef double[::1] total = total_arr
    cdef long long[::1] prev = prev_arr
    with nogil:
        for j in range(1, n):
            bi = -1
            bc = 0
            bt = 0.0
            for i in range(j):
                mse = _range_mse(sums, i, j)
                if not (mse <= eps):
                    continue
                c = count[i] + 1
                tot = total[i] + mse
                if bi < 0 or c < bc or (c == bc and tot < bt):
                    bi = i
                    bc = c
                    bt = tot
            prev[j] = bi
            count[j] = bc
            total[j] = bt
    return prev_arr


def fixed_count_dp(const double[:, ::1] sums, const double[::1] t, const double[::1] v,
                   double t_shift, double v_shift, Py_ssize_t m):
    cdef Py_ssize_t n = t.shape[0]
    cdef Py_ssize_t i, j, k, kmax, bi
    cdef double best, cand, fi
    f_arr = np.full((m + 1, n), np.inf)
    arg_arr = np.full((m + 1, n), -1, dtype=np.int64)
    row_arr = np.empty(n, dtype=np.float64)
    cdef double[:, ::1] f = f_arr
    cdef long long[:, ::1] arg = arg_arr
    cdef double[::1] row = row_arr
    with nogil:
        for j in range(1, n):
            for i in range(j):
                row[i] = _range_mse(sums, i, j)
            f[1, j] = row[0]
            arg[1, j] = 0
            kmax = m if m < j else j
            for k in range(2, kmax + 1):
                best = INFINITY
                bi = -1
                for i in range(k - 1, j):
                    fi = f[k - 1, i]
                    cand = fi if fi > row[i] else row[i]
                    if bi < 0 or cand < best:
                        best = cand
                        bi = i
                f[k, j] = best
                arg[k, j] = bi
    cuts = [n - 1]
    j = n - 1
    for k in range(m, 0, -1):
        j = arg[k, j]
        cuts.append(j)
    return np.array(cuts[::-1], dtype=np.int64), float(f[m, n - 1])


def constrained_fit(const double[:, ::1] sums, const double[::1] t, const double[::1] v,
                    double t_shift, double v_shift, Py_ssize_t i, Py_ssize_t j, box):
    cdef double a = 0.0, b = 0.0, f
    f = _constrained(sums, t, v, t_shift, v_shift, i, j,
                     box[0], box[1], box[2], box[3], &a, &b)
    return a, b, f


def constrained_row(const double[:, ::1] sums, const double[::1] t, const double[::1] v,
                    double t_shift, double v_shift, Py_ssize_t i, Py_ssize_t j_lo,
                    Py_ssize_t j_hi, box):
    cdef Py_ssize_t m = j_hi - j_lo, k
    cdef double a_lo = box[0], a_hi = box[1], b_lo = box[2], b_hi = box[3]
    a_arr = np.empty(m, dtype=np.float64)
    b_arr = np.empty(m, dtype=np.float64)
    f_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] aa = a_arr
    cdef double[::1] bb = b_arr
    cdef double[::1] ff = f_arr
    for k in range(m):
        ff[k] = _constrained(sums, t, v, t_shift, v_shift, i, j_lo + k,
                             a_lo, a_hi, b_lo, b_hi, &aa[k], &bb[k])
    return a_arr, b_arr, f_arr


def match_dp(const double[:, ::1] sums, const double[::1] t, const double[::1] v,
             double t_shift, double v_shift, const double[:, ::1] boxes,
             const unsigned char[:, ::1] follow, double nu):
    cdef Py_ssize_t n = t.shape[0]
    cdef Py_ssize_t S = follow.shape[0]
    cdef Py_ssize_t i, j, s, q, src
    cdef bint changed, any_reached
    cdef double a = 0.0, b = 0.0, f, dur
    reached_arr = np.zeros((n, S), dtype=np.uint8)
    pred_i_arr = np.full((n, S), -1, dtype=np.int64)
    pred_s_arr = np.full((n, S), -1, dtype=np.int64)
    cdef unsigned char[:, ::1] reached = reached_arr
    cdef long long[:, ::1] pred_i = pred_i_arr
    cdef long long[:, ::1] pred_s = pred_s_arr
    reached[0, 0] = 1
    with nogil:
        for i in range(n):
            any_reached = False
            for s in range(S):
                if reached[i, s]:
                    any_reached = True
                    break
            if not any_reached:
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
                        if not (boxes[q - 1, 4] <= 0.0 and 0.0 <= boxes[q - 1, 5]):
                            continue
                        f = _constrained(sums, t, v, t_shift, v_shift, i, i,
                                         boxes[q - 1, 0], boxes[q - 1, 1],
                                         boxes[q - 1, 2], boxes[q - 1, 3], &a, &b)
                        if f <= nu:
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
                for j in range(i + 1, n):
                    dur = t[j] - t[i]
                    if dur > boxes[q - 1, 5]:
                        break
                    if dur < boxes[q - 1, 4] or reached[j, q]:
                        continue
                    f = _constrained(sums, t, v, t_shift, v_shift, i, j,
                                     boxes[q - 1, 0], boxes[q - 1, 1],
                                     boxes[q - 1, 2], boxes[q - 1, 3], &a, &b)
                    if f <= nu:
                        reached[j, q] = 1
                        pred_i[j, q] = i
                        pred_s[j, q] = src
    return reached_arr, pred_i_arr, pred_s_arr
