# Compiled twins of kernels_py: 3x3/pad-1 convolution and 2x2 max pooling.
# Same contracts and tie rules as the NumPy fallback; float64 only.

import numpy as np

cimport numpy as cnp

cnp.import_array()


def conv2d_forward(double[:, :, ::1] x, double[:, :, :, ::1] w, double[::1] b, int stride):
    cdef int cin = x.shape[0], h = x.shape[1], wd = x.shape[2]
    cdef int cout = w.shape[0]
    cdef int ho = (h - 1) // stride + 1
    cdef int wo = (wd - 1) // stride + 1
    y_arr = np.empty((cout, ho, wo), dtype=np.float64)
    cdef double[:, :, ::1] y = y_arr
    cdef int co, ci, i, j, ki, kj, ii, jj
    cdef double acc
    for co in range(cout):
        for i in range(ho):
            for j in range(wo):
                acc = b[co]
                for ci in range(cin):
                    for ki in range(3):
                        ii = i * stride + ki - 1
                        if ii < 0 or ii >= h:
                            continue
                        for kj in range(3):
                            jj = j * stride + kj - 1
                            if jj < 0 or jj >= wd:
                                continue
                            acc += w[co, ci, ki, kj] * x[ci, ii, jj]
                y[co, i, j] = acc
    return y_arr


def conv2d_backward(double[:, :, ::1] x, double[:, :, :, ::1] w,
                    double[:, :, ::1] dout, int stride):
    cdef int cin = x.shape[0], h = x.shape[1], wd = x.shape[2]
    cdef int cout = w.shape[0]
    cdef int ho = dout.shape[1], wo = dout.shape[2]
    dx_arr = np.zeros((cin, h, wd), dtype=np.float64)
    dw_arr = np.zeros((cout, cin, 3, 3), dtype=np.float64)
    db_arr = np.zeros(cout, dtype=np.float64)
    cdef double[:, :, ::1] dx = dx_arr
    cdef double[:, :, :, ::1] dw = dw_arr
    cdef double[::1] db = db_arr
    cdef int co, ci, i, j, ki, kj, ii, jj
    cdef double g
    for co in range(cout):
        for i in range(ho):
            for j in range(wo):
                g = dout[co, i, j]
                db[co] += g
                for ci in range(cin):
                    for ki in range(3):
                        ii = i * stride + ki - 1
                        if ii < 0 or ii >= h:
                            continue
                        for kj in range(3):
                            jj = j * stride + kj - 1
                            if jj < 0 or jj >= wd:
                                continue
                            dw[co, ci, ki, kj] += g * x[ci, ii, jj]
                            dx[ci, ii, jj] += g * w[co, ci, ki, kj]
    return dx_arr, dw_arr, db_arr


def maxpool2x2_forward(double[:, :, ::1] x):
    cdef int c = x.shape[0], h = x.shape[1], w = x.shape[2]
    if h % 2 or w % 2:
        raise ValueError(f"max_pool_2x2 needs even spatial dims, got {h}x{w}")
    y_arr = np.empty((c, h // 2, w // 2), dtype=np.float64)
    cdef double[:, :, ::1] y = y_arr
    cdef int ci, i, j
    cdef double m, v
    for ci in range(c):
        for i in range(h // 2):
            for j in range(w // 2):
                m = x[ci, 2 * i, 2 * j]
                v = x[ci, 2 * i, 2 * j + 1]
                if v > m:
                    m = v
                v = x[ci, 2 * i + 1, 2 * j]
                if v > m:
                    m = v
                v = x[ci, 2 * i + 1, 2 * j + 1]
                if v > m:
                    m = v
                y[ci, i, j] = m
    return y_arr


def maxpool2x2_backward(double[:, :, ::1] x, double[:, :, ::1] dout):
    # Ties resolve to the first maximum in row-major window order, matching
    # the NumPy fallback.
    cdef int c = x.shape[0], h = x.shape[1], w = x.shape[2]
    dx_arr = np.zeros((c, h, w), dtype=np.float64)
    cdef double[:, :, ::1] dx = dx_arr
    cdef int ci, i, j, ki, kj, bi, bj
    cdef double m, v
    for ci in range(c):
        for i in range(h // 2):
            for j in range(w // 2):
                m = x[ci, 2 * i, 2 * j]
                bi = 2 * i
                bj = 2 * j
                for ki in range(2):
                    for kj in range(2):
                        v = x[ci, 2 * i + ki, 2 * j + kj]
                        if v > m:
                            m = v
                            bi = 2 * i + ki
                            bj = 2 * j + kj
                dx[ci, bi, bj] += dout[ci, i, j]
    return dx_arr
