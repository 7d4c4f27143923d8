"""Compiled inner loops for the implicit factor.

Plain sequential loops: every dot product is accumulated left to right, so
results are reproducible and identical whether a vector goes through
``az`` alone or through the population sampler.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _az_into(x, z, positions, P, V, b, j, a):
    n = z.shape[0]
    for i in range(n):
        x[i] = z[i]
    for t in positions:
        s = j[t]
        dot = 0.0
        for i in range(n):
            dot += V[s, i] * z[i]
        k = b[s] * dot
        for i in range(n):
            x[i] = a * x[i] + k * P[s, i]


@njit(cache=True)
def az_kernel(z, positions, P, V, b, j, a):
    x = np.empty_like(z)
    _az_into(x, z, positions, P, V, b, j, a)
    return x


@njit(cache=True)
def ainvz_kernel(z, positions, V, d, j, c):
    n = z.shape[0]
    x = z.copy()
    for t in positions:
        s = j[t]
        dot = 0.0
        for i in range(n):
            dot += V[s, i] * x[i]
        k = d[s] * dot
        for i in range(n):
            x[i] = c * x[i] - k * V[s, i]
    return x


@njit(cache=True)
def sample_mirrored(mean, sigma, Z, m_stars, count, P, V, b, j, a, lam):
    """Rows ``2r`` are ``mean + sigma * az(Z[r], newest m_stars[r])``, rows
    ``2r + 1`` their reflections ``2 * mean - x``."""
    n = mean.shape[0]
    X = np.empty((lam, n))
    y = np.empty(n)
    for r in range(Z.shape[0]):
        positions = np.arange(count - m_stars[r], count)
        _az_into(y, Z[r], positions, P, V, b, j, a)
        k = 2 * r
        for i in range(n):
            X[k, i] = mean[i] + sigma * y[i]
        if k + 1 < lam:
            for i in range(n):
                X[k + 1, i] = 2.0 * mean[i] - X[k, i]
    return X


@njit(cache=True)
def sign_of_uniform(u):
    # the same mapping as RandomSource.rademacher_vector
    return 1.0 if u >= 0.5 else -1.0


@njit(cache=True)
def ask_kernel(gen, mean, sigma, m_sigma, count, P, V, b, j, a, lam):
    """Draw and sample a whole mirrored population.

    Per sampled candidate ``r`` the generator is consumed in a fixed order:
    one standard normal for the subset size (ten times wider for ``r = 0``),
    then ``n`` uniforms mapped to signs.
    """
    n = mean.shape[0]
    n_sampled = (lam + 1) // 2
    Z = np.empty((n_sampled, n))
    m_stars = np.empty(n_sampled, dtype=np.int64)
    for r in range(n_sampled):
        scale = 10.0 * m_sigma if r == 0 else m_sigma
        ms = int(np.floor(scale * abs(gen.standard_normal())))
        m_stars[r] = min(ms, count)
        for i in range(n):
            Z[r, i] = sign_of_uniform(gen.random())
    X = sample_mirrored(mean, sigma, Z, m_stars, count, P, V, b, j, a, lam)
    return X, Z, m_stars


@njit(cache=True)
def coefficients(v, c1, a):
    """``(||v||^2, b, d)`` of the rank-one update along ``v``."""
    v2 = 0.0
    for i in range(v.shape[0]):
        v2 += v[i] * v[i]
    root = np.sqrt(1.0 + c1 / (1.0 - c1) * v2)
    b = a / v2 * (root - 1.0) if v2 > 0.0 else 0.0
    d = 1.0 / (a * v2) * (1.0 - 1.0 / root) if v2 > 0.0 else 0.0
    return v2, b, d


@njit(cache=True)
def update_inverses_kernel(P, V, b, d, j, start, c1, a, c_inv, eps):
    """Recompute ``V``, ``b`` and ``d`` for positions ``start..len(j)-1``.

    Returns a boolean flag per position marking degenerate vectors, whose
    coefficients are set to zero.
    """
    count = j.shape[0]
    degenerate = np.zeros(count, dtype=np.bool_)
    for pos in range(start, count):
        s = j[pos]
        V[s] = ainvz_kernel(P[s], np.arange(pos), V, d, j, c_inv)
        v2, bs, ds = coefficients(V[s], c1, a)
        # an overflowed norm is treated like a vanishing one
        if v2 > eps and v2 < np.inf:
            b[s] = bs
            d[s] = ds
        else:
            b[s] = 0.0
            d[s] = 0.0
            degenerate[pos] = True
    return degenerate


@njit(cache=True)
def rank_sum_difference(prev, curr):
    """Sum of the ranks of ``prev`` minus that of ``curr`` in the merged list.

    Ranks ascend from 1; equal values keep merged order, ``prev`` first.
    """
    lam = prev.shape[0]
    diff = 0
    for i in range(lam):
        # rank of prev[i]: smaller values, plus equal ones earlier in prev
        r = 1
        for k in range(lam):
            if prev[k] < prev[i] or (prev[k] == prev[i] and k < i):
                r += 1
            if curr[k] < prev[i]:
                r += 1
        diff += r
        # rank of curr[i]: every equal prev entry ranks first
        r = 1
        for k in range(lam):
            if prev[k] <= curr[i]:
                r += 1
            if curr[k] < curr[i] or (curr[k] == curr[i] and k < i):
                r += 1
        diff -= r
    return diff
