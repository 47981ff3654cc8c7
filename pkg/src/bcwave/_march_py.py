"""Pure-numpy fallback for the characteristic-cell march.

Same contract as the compiled version in ``_march.pyx``.  The recurrence
couples each anti-diagonal a + b = s only to the two previous ones, so the
update vectorizes wavefront by wavefront.
"""

import numpy as np


def march(W, qd, h):
    m = W.shape[0] - 1
    coef = 0.125 * h * h
    for s in range(2, 2 * m + 1):
        a = np.arange(max(1, s - m), min(s - 1, m) + 1)
        if len(a) == 0:
            continue
        b = s - a
        wa = W[a - 1, b]
        wb = W[a, b - 1]
        W[a, b] = wa + wb - W[a - 1, b - 1] - coef * qd[a - b + m] * (wa + wb)
    return W
