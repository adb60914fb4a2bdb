"""Integer-order Bessel functions J_n(x) by Miller's backward recurrence.

Recurrence J_{k-1} = (2k/x) J_k - J_{k+1} is stable downwards; starting far
above the wanted orders with an arbitrary seed and normalising with
J_0 + 2 sum_k J_{2k} = 1 gives all orders at once.
"""

import math

import numpy as np

_BIG = 1e250
# below this |x| the recurrence overflows; two series terms are exact to ~1e-22
_SMALL = 1e-5


def _start_order(n_max, ax):
    m = max(n_max, math.ceil(ax)) + 30 + int(math.sqrt(40.0 * max(n_max, ax, 1.0)))
    return m + (m % 2)


def jn_table(n_max, x):
    """Array [J_0(x), ..., J_{n_max}(x)]."""
    n_max = int(n_max)
    out = np.zeros(n_max + 1)
    if x == 0:
        out[0] = 1.0
        return out
    ax = abs(x)
    if ax < _SMALL:
        out[:] = _small_series(n_max, ax)
    else:
        out[:] = _miller(n_max, ax)
    if x < 0:
        out[1::2] *= -1.0
    return out


def _small_series(n_max, ax):
    h = 0.5 * ax
    out = np.zeros(n_max + 1)
    term = 1.0
    for n in range(n_max + 1):
        if n:
            term *= h / n
            if term == 0.0:
                break
        out[n] = term * (1.0 - h * h / (n + 1))
    return out


def _miller(n_max, ax):
    m = _start_order(n_max, ax)
    vals = np.zeros(m + 2)
    vals[m] = 1e-30
    two_over_x = 2.0 / ax
    for k in range(m, 0, -1):
        vals[k - 1] = k * two_over_x * vals[k] - vals[k + 1]
        if abs(vals[k - 1]) > _BIG:
            vals[k - 1 :] /= _BIG
    norm = vals[0] + 2.0 * vals[2 : m + 1 : 2].sum()
    return vals[: n_max + 1] / norm


def jn(orders, x):
    """J_n(x) for an array of (possibly negative) integer orders."""
    orders = np.asarray(orders, dtype=int)
    if orders.size == 0:
        return np.zeros(0)
    table = jn_table(int(np.abs(orders).max()), x)
    vals = table[np.abs(orders)]
    # J_{-n} = (-1)^n J_n
    neg_odd = (orders < 0) & (orders % 2 == 1)
    vals[neg_odd] *= -1.0
    return vals
