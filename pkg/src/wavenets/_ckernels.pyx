# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_pykernels``.

Signatures and output layouts match the numpy versions exactly; only the
loop structure differs.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def im2col(const double[:, :, :, ::1] x, int kh, int kw, int stride):
    cdef Py_ssize_t n = x.shape[0], c = x.shape[1], h = x.shape[2], w = x.shape[3]
    cdef Py_ssize_t ho = (h - kh) // stride + 1
    cdef Py_ssize_t wo = (w - kw) // stride + 1
    cdef Py_ssize_t ncol = c * kh * kw
    out_arr = np.empty((n * ho * wo, ncol), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t b, oy, ox, ch, i, j, row, col, y0, x0
    for b in range(n):
        for oy in range(ho):
            y0 = oy * stride
            for ox in range(wo):
                x0 = ox * stride
                row = (b * ho + oy) * wo + ox
                col = 0
                for ch in range(c):
                    for i in range(kh):
                        for j in range(kw):
                            out[row, col] = x[b, ch, y0 + i, x0 + j]
                            col += 1
    return out_arr


def col2im(const double[:, ::1] cols, Py_ssize_t n, Py_ssize_t c, Py_ssize_t h, Py_ssize_t w,
           int kh, int kw, int stride):
    cdef Py_ssize_t ho = (h - kh) // stride + 1
    cdef Py_ssize_t wo = (w - kw) // stride + 1
    out_arr = np.zeros((n, c, h, w), dtype=np.float64)
    cdef double[:, :, :, ::1] out = out_arr
    cdef Py_ssize_t b, oy, ox, ch, i, j, row, col, y0, x0
    for b in range(n):
        for oy in range(ho):
            y0 = oy * stride
            for ox in range(wo):
                x0 = ox * stride
                row = (b * ho + oy) * wo + ox
                col = 0
                for ch in range(c):
                    for i in range(kh):
                        for j in range(kw):
                            out[b, ch, y0 + i, x0 + j] += cols[row, col]
                            col += 1
    return out_arr


def analysis(const double[:, :, ::1] x, const double[:, :, ::1] bank):
    cdef Py_ssize_t d = bank.shape[2]
    cdef Py_ssize_t nb = x.shape[0], h = x.shape[1], w = x.shape[2]
    cdef Py_ssize_t ho = (h - d) // 2 + 1
    cdef Py_ssize_t wo = (w - d) // 2 + 1
    out_arr = np.zeros((4, nb, ho, wo), dtype=np.float64)
    cdef double[:, :, :, ::1] out = out_arr
    cdef Py_ssize_t b, oy, ox, i, j
    cdef double v, s0, s1, s2, s3
    for b in range(nb):
        for oy in range(ho):
            for ox in range(wo):
                s0 = 0.0
                s1 = 0.0
                s2 = 0.0
                s3 = 0.0
                for i in range(d):
                    for j in range(d):
                        v = x[b, 2 * oy + i, 2 * ox + j]
                        s0 += bank[0, i, j] * v
                        s1 += bank[1, i, j] * v
                        s2 += bank[2, i, j] * v
                        s3 += bank[3, i, j] * v
                out[0, b, oy, ox] = s0
                out[1, b, oy, ox] = s1
                out[2, b, oy, ox] = s2
                out[3, b, oy, ox] = s3
    return out_arr


def analysis_adjoint(const double[:, :, :, ::1] g, const double[:, :, ::1] bank, Py_ssize_t h, Py_ssize_t w):
    cdef Py_ssize_t d = bank.shape[2]
    cdef Py_ssize_t nb = g.shape[1], ho = g.shape[2], wo = g.shape[3]
    out_arr = np.zeros((nb, h, w), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t b, oy, ox, i, j
    cdef double g0, g1, g2, g3
    for b in range(nb):
        for oy in range(ho):
            for ox in range(wo):
                g0 = g[0, b, oy, ox]
                g1 = g[1, b, oy, ox]
                g2 = g[2, b, oy, ox]
                g3 = g[3, b, oy, ox]
                for i in range(d):
                    for j in range(d):
                        out[b, 2 * oy + i, 2 * ox + j] += (
                            bank[0, i, j] * g0 + bank[1, i, j] * g1
                            + bank[2, i, j] * g2 + bank[3, i, j] * g3
                        )
    return out_arr
