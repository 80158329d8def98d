"""Pure numpy fallback for the structure-constant kernel."""
import numpy as np


def _hrange(ns, m, n):
    return np.arange(abs(m - n), min(m + n, 2 * ns - m - n) + 1, 2)


def _norm(ns, m, n, h, binom):
    a = (h + m - n) // 2
    b = (h - m + n) // 2
    c = (m + n - h) // 2
    return np.sqrt(binom[ns, a] * binom[ns - a, b] * binom[ns - a - b, c])


def _take(binom, n, k):
    # binomial lookup that returns 0 outside 0 <= k <= n
    ok = (k >= 0) & (k <= n) & (n >= 0)
    return np.where(ok, binom[np.clip(n, 0, None), np.clip(k, 0, binom.shape[1] - 1)], 0.0)


def chi_block(ns, m1, n1, n2, binom):
    """Normalized structure constants for the product block (m1, n1) x (n1, n2).

    Same contract as the compiled kernel: output indexed ``[i1, i2, i]``.
    """
    binom = np.asarray(binom, dtype=np.float64)
    h1 = _hrange(ns, m1, n1)[:, None, None, None]
    h2 = _hrange(ns, n1, n2)[None, :, None, None]
    h = _hrange(ns, m1, n2)[None, None, :, None]
    k3 = np.arange(ns + 1)[None, None, None, :]

    a1 = (h1 + m1 - n1) // 2
    b1 = (h1 - m1 + n1) // 2
    c1 = (m1 + n1 - h1) // 2
    e1 = ns - h1 - c1
    a2 = (h2 + n1 - n2) // 2
    b2 = (h2 - n1 + n2) // 2
    c2 = (n1 + n2 - h2) // 2
    e2 = ns - h2 - c2
    a0 = (h + m1 - n2) // 2
    b0 = (h - m1 + n2) // 2
    c0 = (m1 + n2 - h) // 2
    e0 = ns - h - c0

    k1 = a1 - k3
    k4 = b2 - k1
    k2 = a2 - a0 + k3
    valid = (
        (k3 <= a0)
        & (b1 == k2 + b0 - k4)
        & (c1 == c0 - k1 + a0 - k3)
        & (e1 == e0 - k2 + k4)
        & (c2 == c0 - k1 + b0 - k4)
        & (e2 == e0 - k2 + k3)
    )
    terms = (
        _take(binom, c0, k1)
        * _take(binom, e0, k2)
        * _take(binom, a0, k3)
        * _take(binom, b0, k4)
    )
    cnt = np.where(valid, terms, 0.0).sum(axis=-1)

    k_left = _norm(ns, m1, n1, h1[..., 0], binom)
    k_right = _norm(ns, n1, n2, h2[..., 0], binom)
    k_out = _norm(ns, m1, n2, h[..., 0], binom)
    return np.ascontiguousarray(cnt * k_out / (k_left * k_right))
