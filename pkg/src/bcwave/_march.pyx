# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled characteristic-cell march for the Goursat kernel problems.

The lattice W[a, b] samples the kernel at xi = a*h, eta = b*h (light-cone
characteristic coordinates).  Row b = 0 and column a = 0 must hold the
diagonal boundary data on entry; interior nodes are filled with the
4-point cell update

    W[a,b] = W[a-1,b] + W[a,b-1] - W[a-1,b-1]
             - (h^2/8) * q(mid) * (W[a-1,b] + W[a,b-1])

where q(mid) = qd[a - b + m] is the potential at the cell midpoint.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def march(cnp.ndarray[cnp.float64_t, ndim=2] W,
          cnp.ndarray[cnp.float64_t, ndim=1] qd,
          double h):
    cdef Py_ssize_t m = W.shape[0] - 1
    cdef Py_ssize_t a, b
    cdef double coef = 0.125 * h * h
    cdef double wa, wb
    for a in range(1, m + 1):
        for b in range(1, m + 1):
            wa = W[a - 1, b]
            wb = W[a, b - 1]
            W[a, b] = wa + wb - W[a - 1, b - 1] \
                - coef * qd[a - b + m] * (wa + wb)
    return W
