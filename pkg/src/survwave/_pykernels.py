"""Pure NumPy fallback for the compiled kernels."""

import numpy as np


def dl_values(T0, T1, v0, t, depth):
    """Values ``phi(t + j)`` for ``j = 0..n-1`` at every ``t`` in ``[0, 1)``.

    Row ``i`` of the result is ``T_{d_1} ... T_{d_depth} v0`` where ``d_k`` are
    the leading binary digits of ``t[i]``.
    """
    t = np.asarray(t, dtype=np.float64)
    m, n = t.shape[0], v0.shape[0]
    digits = np.empty((depth, m), dtype=bool)
    x = t.copy()
    for k in range(depth):
        x *= 2.0
        d = x >= 1.0
        x[d] -= 1.0
        digits[k] = d
    V = np.broadcast_to(v0, (m, n)).copy()
    T0t, T1t = T0.T, T1.T
    for k in range(depth - 1, -1, -1):
        V = np.where(digits[k][:, None], V @ T1t, V @ T0t)
    return V
