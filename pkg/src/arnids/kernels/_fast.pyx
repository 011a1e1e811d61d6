# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled single-sequence scans for both cells.

Forward only, double precision, plain C loops. Numerically these follow the
same operation order as the numpy reference scans so the two backends agree
to rounding error. The unused second query projection of the attention cell
is computed here as well, on purpose: the timing path should perform the
same work the cell definition describes.
"""

from libc.math cimport exp, sqrt, tanh

import numpy as np


cdef void _matvec(double[:, ::1] M, double* v, double* out, Py_ssize_t rows, Py_ssize_t cols) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(rows):
        acc = 0.0
        for j in range(cols):
            acc += M[i, j] * v[j]
        out[i] = acc


cdef double _dot(double* a, double* b, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0
    for i in range(n):
        acc += a[i] * b[i]
    return acc


cdef double _sigmoid(double x) noexcept nogil:
    if x >= 0.0:
        return 1.0 / (1.0 + exp(-x))
    cdef double e = exp(x)
    return e / (1.0 + e)


def arn_scan(double[:, ::1] Wx, double[:, ::1] Wh,
             double[:, ::1] Wq, double[:, ::1] Wk, double[:, ::1] Wv,
             double[:, ::1] xs, double[::1] h0):
    """Attention-cell scan; returns the state after every step, [T x n]."""
    cdef Py_ssize_t T = xs.shape[0]
    cdef Py_ssize_t m = xs.shape[1]
    cdef Py_ssize_t n = Wx.shape[0]
    out_arr = np.empty((T, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    scratch_arr = np.empty((9, n), dtype=np.float64)
    cdef double[:, ::1] s = scratch_arr
    cdef double* h
    cdef double* x_proj
    cdef double* h_proj
    cdef double* q1
    cdef double* q2
    cdef double* k1
    cdef double* k2
    cdef double* v1
    cdef double* v2
    cdef double scale, score_h, score_x, top, eh, ex, w_h, w_x
    cdef Py_ssize_t t, i

    with nogil:
        h = &s[0, 0]
        x_proj = &s[1, 0]
        h_proj = &s[2, 0]
        q1 = &s[3, 0]
        q2 = &s[4, 0]
        k1 = &s[5, 0]
        k2 = &s[6, 0]
        v1 = &s[7, 0]
        v2 = &s[8, 0]
        for i in range(n):
            h[i] = h0[i]
        scale = sqrt(<double> n)
        for t in range(T):
            _matvec(Wx, &xs[t, 0], x_proj, n, m)
            _matvec(Wh, h, h_proj, n, n)
            _matvec(Wq, h_proj, q1, n, n)
            _matvec(Wq, x_proj, q2, n, n)
            _matvec(Wk, h_proj, k1, n, n)
            _matvec(Wk, x_proj, k2, n, n)
            _matvec(Wv, h_proj, v1, n, n)
            _matvec(Wv, x_proj, v2, n, n)
            score_h = _dot(q1, k1, n) / scale
            score_x = _dot(q1, k2, n) / scale
            top = score_h if score_h > score_x else score_x
            eh = exp(score_h - top)
            ex = exp(score_x - top)
            w_h = eh / (eh + ex)
            w_x = ex / (eh + ex)
            for i in range(n):
                h[i] = w_h * v1[i] + w_x * v2[i] + x_proj[i]
                out[t, i] = h[i]
    return out_arr


def gru_scan(double[:, ::1] W_R, double[:, ::1] W_Z, double[:, ::1] W_h,
             double[:, ::1] xs, double[::1] h0):
    """Gated-cell scan; returns the state after every step, [T x n]."""
    cdef Py_ssize_t T = xs.shape[0]
    cdef Py_ssize_t m = xs.shape[1]
    cdef Py_ssize_t n = W_R.shape[1]
    out_arr = np.empty((T, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    scratch_arr = np.empty((2, n + m), dtype=np.float64)
    cdef double[:, ::1] s = scratch_arr
    gates_arr = np.empty((4, n), dtype=np.float64)
    cdef double[:, ::1] g = gates_arr
    cdef double* hx
    cdef double* xc
    cdef double* h
    cdef double* r
    cdef double* z
    cdef double* cand
    cdef double acc
    cdef Py_ssize_t t, i, j

    with nogil:
        hx = &s[0, 0]
        xc = &s[1, 0]
        h = &g[0, 0]
        r = &g[1, 0]
        z = &g[2, 0]
        cand = &g[3, 0]
        for i in range(n):
            h[i] = h0[i]
        for t in range(T):
            # hx = [h_prev, x]
            for i in range(n):
                hx[i] = h[i]
            for i in range(m):
                hx[n + i] = xs[t, i]
            # gates: columns of the (n+m) x n weight matrices
            for i in range(n):
                acc = 0.0
                for j in range(n + m):
                    acc += hx[j] * W_R[j, i]
                r[i] = _sigmoid(acc)
            for i in range(n):
                acc = 0.0
                for j in range(n + m):
                    acc += hx[j] * W_Z[j, i]
                z[i] = _sigmoid(acc)
            # xc = [x, r * h_prev]
            for i in range(m):
                xc[i] = xs[t, i]
            for i in range(n):
                xc[m + i] = r[i] * h[i]
            for i in range(n):
                acc = 0.0
                for j in range(n + m):
                    acc += xc[j] * W_h[j, i]
                cand[i] = tanh(acc)
            for i in range(n):
                h[i] = z[i] * cand[i] + (1.0 - z[i]) * h[i]
                out[t, i] = h[i]
    return out_arr
