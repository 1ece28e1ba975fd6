# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled adaptive Dormand-Prince 5(4) stepper on matrix-valued ODEs.

Semantically identical to `_rk45_py`; consumes the flattened sparse-operator
arena prepared by `sqcav.kernel`.  Operators are stored in coordinate form;
left application runs contiguous row AXPYs, right application iterates rows
of the state so both matrices stay cache resident.  Complex arithmetic is
hand-split into real pairs so the compiler can vectorize.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, fabs
from libc.string cimport memset, memcpy

cnp.import_array()

ctypedef double complex zc
ctypedef cnp.int64_t i64

DEF SAFETY = 0.9
DEF MIN_FACTOR = 0.2
DEF MAX_FACTOR = 10.0

cdef double C2 = 0.2, C3 = 0.3, C4 = 0.8, C5 = 8.0 / 9.0
cdef double A21 = 0.2
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0
cdef double A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0
cdef double A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0
cdef double B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0


cdef inline void _apply_left(int d, Py_ssize_t nnz, i64* rows, i64* cols, zc* vals,
                             zc* y, zc* out, zc alpha) noexcept:
    # out += alpha * Op @ y : for each nonzero (r, c, v), out[r, :] += v * y[c, :]
    cdef Py_ssize_t k, j
    cdef double vr, vi, yr, yi
    cdef zc v
    cdef double* yp
    cdef double* op
    for k in range(nnz):
        v = alpha * vals[k]
        vr = v.real
        vi = v.imag
        yp = <double*> (y + cols[k] * d)
        op = <double*> (out + rows[k] * d)
        for j in range(d):
            yr = yp[2 * j]
            yi = yp[2 * j + 1]
            op[2 * j] += vr * yr - vi * yi
            op[2 * j + 1] += vr * yi + vi * yr


cdef inline void _apply_right(int d, Py_ssize_t nnz, i64* rows, i64* cols, zc* vals,
                              zc* y, zc* out, zc alpha) noexcept:
    # out += alpha * y @ Op : for each nonzero (r, c, v), out[:, c] += v * y[:, r]
    # iterated state-row-major so y[i, :] and out[i, :] stay in cache
    cdef Py_ssize_t k, i
    cdef double vr, vi, yr, yi
    cdef zc v
    cdef double* yrow
    cdef double* orow
    for i in range(d):
        yrow = <double*> (y + i * d)
        orow = <double*> (out + i * d)
        for k in range(nnz):
            v = alpha * vals[k]
            vr = v.real
            vi = v.imag
            yr = yrow[2 * rows[k]]
            yi = yrow[2 * rows[k] + 1]
            orow[2 * cols[k]] += vr * yr - vi * yi
            orow[2 * cols[k] + 1] += vr * yi + vi * yr


cdef struct OpTable:
    int d
    i64* rows
    i64* cols
    zc* vals
    i64* off         # (n_ops + 1,) offsets into the arenas
    int n_st
    int* st_ids      # (n_st, 2): left op, right op
    int n_ph
    int* ph_ids      # (n_ph, 4): A2, B, BA, BA (left/right use same storage)
    zc* ph_w
    double* ph_om
    int n_hm
    int* hm_ids      # (n_hm, 2): Gp, Gm
    double* hm_om


cdef inline void _op_left(OpTable* g, int k, zc* y, zc* out, zc alpha) noexcept:
    _apply_left(g.d, g.off[k + 1] - g.off[k], g.rows + g.off[k], g.cols + g.off[k],
                g.vals + g.off[k], y, out, alpha)


cdef inline void _op_right(OpTable* g, int k, zc* y, zc* out, zc alpha) noexcept:
    _apply_right(g.d, g.off[k + 1] - g.off[k], g.rows + g.off[k], g.cols + g.off[k],
                 g.vals + g.off[k], y, out, alpha)


cdef void _rhs(OpTable* g, double t, zc* y, zc* out, zc* tmp) noexcept:
    cdef int d = g.d
    cdef Py_ssize_t nstate = <Py_ssize_t> d * d
    cdef int s, k
    cdef double w
    cdef zc ph, one = 1.0
    memset(out, 0, nstate * sizeof(zc))
    _op_left(g, 0, y, out, one)     # KL rho
    _op_right(g, 1, y, out, one)    # rho KR
    for s in range(g.n_st):
        memset(tmp, 0, nstate * sizeof(zc))
        _op_left(g, g.st_ids[2 * s], y, tmp, one)
        _op_right(g, g.st_ids[2 * s + 1], tmp, out, one)
    for k in range(g.n_ph):
        w = g.ph_om[k] * t
        ph = g.ph_w[k] * (cos(w) + sin(w) * 1j)
        memset(tmp, 0, nstate * sizeof(zc))
        _op_left(g, g.ph_ids[4 * k], y, tmp, one)
        _op_right(g, g.ph_ids[4 * k + 1], tmp, out, ph)
        _op_left(g, g.ph_ids[4 * k + 2], y, out, -ph)
        _op_right(g, g.ph_ids[4 * k + 3], y, out, -ph)
    for k in range(g.n_hm):
        w = g.hm_om[k] * t
        ph = cos(w) + sin(w) * 1j
        _op_left(g, g.hm_ids[2 * k], y, out, ph)
        _op_right(g, g.hm_ids[2 * k], y, out, -ph)
        ph = cos(w) - sin(w) * 1j
        _op_left(g, g.hm_ids[2 * k + 1], y, out, ph)
        _op_right(g, g.hm_ids[2 * k + 1], y, out, -ph)


cdef double _err_norm(Py_ssize_t n, zc* e, zc* y0, zc* y1, double rtol, double atol) noexcept:
    cdef Py_ssize_t i
    cdef double acc = 0.0, sc, m0, m1, ee
    for i in range(n):
        m0 = sqrt(y0[i].real * y0[i].real + y0[i].imag * y0[i].imag)
        m1 = sqrt(y1[i].real * y1[i].real + y1[i].imag * y1[i].imag)
        sc = atol + rtol * (m0 if m0 > m1 else m1)
        ee = sqrt(e[i].real * e[i].real + e[i].imag * e[i].imag) / sc
        acc += ee * ee
    return sqrt(acc / n)


cdef double _scaled_rms(Py_ssize_t n, zc* v, zc* yref, double rtol, double atol) noexcept:
    cdef Py_ssize_t i
    cdef double acc = 0.0, sc, m
    for i in range(n):
        m = sqrt(yref[i].real * yref[i].real + yref[i].imag * yref[i].imag)
        sc = atol + rtol * m
        m = sqrt(v[i].real * v[i].real + v[i].imag * v[i].imag) / sc
        acc += m * m
    return sqrt(acc / n)


def evolve(
    int d,
    cnp.ndarray[i64, ndim=1, mode="c"] op_rows,
    cnp.ndarray[i64, ndim=1, mode="c"] op_cols,
    cnp.ndarray[zc, ndim=1, mode="c"] op_vals,
    cnp.ndarray[i64, ndim=1, mode="c"] op_off,
    cnp.ndarray[cnp.int32_t, ndim=2, mode="c"] st_ids,
    cnp.ndarray[cnp.int32_t, ndim=2, mode="c"] ph_ids,
    cnp.ndarray[zc, ndim=1, mode="c"] ph_w,
    cnp.ndarray[double, ndim=1, mode="c"] ph_om,
    cnp.ndarray[cnp.int32_t, ndim=2, mode="c"] hm_ids,
    cnp.ndarray[double, ndim=1, mode="c"] hm_om,
    cnp.ndarray[zc, ndim=2, mode="c"] rho0,
    double t0,
    cnp.ndarray[double, ndim=1, mode="c"] t_eval,
    double rtol,
    double atol,
    double max_step,
    double first_step,
    long long max_steps,
    cnp.ndarray[zc, ndim=3, mode="c"] obs,
    bint store_states,
    cnp.ndarray[zc, ndim=3, mode="c"] out_states,
    cnp.ndarray[zc, ndim=2, mode="c"] out_obs,
):
    cdef OpTable g
    g.d = d
    g.rows = <i64*> op_rows.data
    g.cols = <i64*> op_cols.data
    g.vals = <zc*> op_vals.data
    g.off = <i64*> op_off.data
    g.n_st = st_ids.shape[0]
    g.st_ids = <int*> st_ids.data
    g.n_ph = ph_ids.shape[0]
    g.ph_ids = <int*> ph_ids.data
    g.ph_w = <zc*> ph_w.data
    g.ph_om = <double*> ph_om.data
    g.n_hm = hm_ids.shape[0]
    g.hm_ids = <int*> hm_ids.data
    g.hm_om = <double*> hm_om.data

    cdef Py_ssize_t n = <Py_ssize_t> d * d
    cdef int n_eval = t_eval.shape[0]
    cdef int n_obs = obs.shape[0]
    cdef zc* obs_p = <zc*> obs.data

    work = np.zeros((10, d, d), dtype=complex)
    cdef cnp.ndarray[zc, ndim=3, mode="c"] wk = work
    cdef zc* y = <zc*> wk.data
    cdef zc* ynew = y + n
    cdef zc* yt = ynew + n
    cdef zc* k1 = yt + n
    cdef zc* k2 = k1 + n
    cdef zc* k3 = k2 + n
    cdef zc* k4 = k3 + n
    cdef zc* k5 = k4 + n
    cdef zc* k6 = k5 + n
    cdef zc* tmp = k6 + n
    err_arr = np.zeros((2, d, d), dtype=complex)
    cdef cnp.ndarray[zc, ndim=3, mode="c"] ew = err_arr
    cdef zc* evec = <zc*> ew.data
    cdef zc* k7 = evec + n

    memcpy(y, <zc*> rho0.data, n * sizeof(zc))

    cdef zc* outs_p = <zc*> out_states.data
    cdef zc* outo_p = <zc*> out_obs.data
    cdef double* te = <double*> t_eval.data

    cdef double t = t0
    cdef int i_ev = 0
    cdef Py_ssize_t i, j
    cdef int ko
    cdef zc acc
    cdef double eps = 2.220446049250313e-16

    while i_ev < n_eval and te[i_ev] <= t + 1e-15 * (1.0 if fabs(t) < 1.0 else fabs(t)):
        if store_states:
            memcpy(outs_p + <Py_ssize_t> i_ev * n, y, n * sizeof(zc))
        else:
            for ko in range(n_obs):
                acc = 0.0
                for i in range(d):
                    for j in range(d):
                        acc = acc + obs_p[ko * n + i * d + j] * y[j * d + i]
                outo_p[i_ev * n_obs + ko] = acc
        i_ev += 1
    if i_ev >= n_eval:
        return {"status": 0, "n_steps": 0, "n_accepted": 0, "n_rejected": 0}

    cdef double t_span = te[n_eval - 1] - t
    _rhs(&g, t, y, k1, tmp)

    cdef double h_ctrl, d0, d1, d2, h0, h1
    if first_step > 0.0:
        h_ctrl = first_step
    else:
        d0 = _scaled_rms(n, y, y, rtol, atol)
        d1 = _scaled_rms(n, k1, y, rtol, atol)
        h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
        for i in range(n):
            yt[i] = y[i] + h0 * k1[i]
        _rhs(&g, t + h0, yt, k2, tmp)
        for i in range(n):
            evec[i] = k2[i] - k1[i]
        d2 = _scaled_rms(n, evec, y, rtol, atol) / h0
        if d1 <= 1e-15 and d2 <= 1e-15:
            h1 = h0 * 1e-3 if h0 * 1e-3 > 1e-6 else 1e-6
        else:
            h1 = (0.01 / (d1 if d1 > d2 else d2)) ** 0.2
        h_ctrl = 100.0 * h0
        if h1 < h_ctrl:
            h_ctrl = h1
        if t_span < h_ctrl:
            h_ctrl = t_span
    if max_step < h_ctrl:
        h_ctrl = max_step

    cdef long long n_steps = 0, n_acc = 0, n_rej = 0
    cdef bint rejected_last = False, truncated
    cdef int status = 0
    cdef double target, h_try, h, err, factor, tcap

    while i_ev < n_eval:
        target = te[i_ev]
        h_try = h_ctrl if h_ctrl < max_step else max_step
        truncated = False
        if t + h_try >= target:
            h_try = target - t
            truncated = True
        tcap = 1.0 if fabs(t) < 1.0 else fabs(t)
        if h_try < 16.0 * eps * tcap:
            status = 1
            break
        n_steps += 1
        if n_steps > max_steps:
            status = 2
            break
        h = h_try
        for i in range(n):
            yt[i] = y[i] + h * (A21 * k1[i])
        _rhs(&g, t + C2 * h, yt, k2, tmp)
        for i in range(n):
            yt[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
        _rhs(&g, t + C3 * h, yt, k3, tmp)
        for i in range(n):
            yt[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
        _rhs(&g, t + C4 * h, yt, k4, tmp)
        for i in range(n):
            yt[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
        _rhs(&g, t + C5 * h, yt, k5, tmp)
        for i in range(n):
            yt[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
        _rhs(&g, t + h, yt, k6, tmp)
        for i in range(n):
            ynew[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i])
        _rhs(&g, t + h, ynew, k7, tmp)
        for i in range(n):
            evec[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        err = _err_norm(n, evec, y, ynew, rtol, atol)
        if err > 1.0:
            n_rej += 1
            rejected_last = True
            factor = SAFETY * err ** -0.2
            if factor < MIN_FACTOR:
                factor = MIN_FACTOR
            h_ctrl = h * factor
            continue
        n_acc += 1
        if err == 0.0:
            factor = MAX_FACTOR
        else:
            factor = SAFETY * err ** -0.2
            if factor > MAX_FACTOR:
                factor = MAX_FACTOR
        if rejected_last and factor > 1.0:
            factor = 1.0
        rejected_last = False
        memcpy(y, ynew, n * sizeof(zc))
        memcpy(k1, k7, n * sizeof(zc))
        if truncated:
            t = target
            if store_states:
                memcpy(outs_p + <Py_ssize_t> i_ev * n, y, n * sizeof(zc))
            else:
                for ko in range(n_obs):
                    acc = 0.0
                    for i in range(d):
                        for j in range(d):
                            acc = acc + obs_p[ko * n + i * d + j] * y[j * d + i]
                    outo_p[i_ev * n_obs + ko] = acc
            i_ev += 1
            if h * factor > h_ctrl:
                h_ctrl = h * factor
        else:
            t = t + h
            h_ctrl = h * factor

    return {
        "status": status,
        "n_steps": int(n_steps),
        "n_accepted": int(n_acc),
        "n_rejected": int(n_rej),
    }
