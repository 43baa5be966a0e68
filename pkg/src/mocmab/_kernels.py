"""Numba kernels for the policies' per-round decision rules.

Each kernel consumes two pre-drawn uniforms per round (``U[b, 0]`` and
``U[b, 1]``); random tie-breaks pick the ``floor(u * n)``-th tied arm in
increasing id order. The per-step ``select`` methods call the same
``*_choose`` functions, so both paths make bit-identical decisions.
"""
import math

import numpy as np
from numba import njit

INF = np.inf


@njit(cache=True)
def pick_tied(u, n):
    k = int(u * n)
    return n - 1 if k >= n else k


@njit(cache=True)
def argmax_random(vals, mask, u):
    best = -INF
    n = 0
    for a in range(vals.shape[0]):
        if not mask[a]:
            continue
        if n == 0 or vals[a] > best:
            best = vals[a]
            n = 1
        elif vals[a] == best:
            n += 1
    k = pick_tied(u, n)
    for a in range(vals.shape[0]):
        if mask[a] and vals[a] == best:
            if k == 0:
                return a
            k -= 1
    return -1


@njit(cache=True)
def moc_width(count, A, scale):
    if count == 0:
        return INF
    return scale * math.sqrt(2.0 * A / count)


@njit(cache=True)
def moc_decide(mu1, mu2, unc, beta_v, v, u0, u1):
    """Returns (arm, explored). ``unc`` holds the scaled uncertainty levels."""
    K = mu1.shape[0]
    g = np.empty(K)
    everyone = np.ones(K, dtype=np.bool_)
    for a in range(K):
        g[a] = mu1[a] + unc[a]
    a1 = argmax_random(g, everyone, u0)
    if unc[a1] > beta_v:
        return a1, True
    cand = np.empty(K, dtype=np.bool_)
    for a in range(K):
        cand[a] = mu1[a] >= mu1[a1] - unc[a1] - unc[a] - 2.0 * v
        g[a] = mu2[a] + unc[a]
    return argmax_random(g, cand, u1), False


@njit(cache=True)
def moc_choose(counts, mu1, mu2, A, scale, beta_v, v, u0, u1):
    K = counts.shape[0]
    unc = np.empty(K)
    for a in range(K):
        unc[a] = moc_width(counts[a], A, scale)
    return moc_decide(mu1, mu2, unc, beta_v, v, u0, u1)


@njit(cache=True)
def moc_play(rows, rewards, U, counts, mu1, mu2, A, scale, beta_v, v, arms, explored):
    for b in range(rows.shape[0]):
        r = rows[b]
        a, e = moc_choose(counts[r], mu1[r], mu2[r], A, scale, beta_v, v, U[b, 0], U[b, 1])
        n = counts[r, a]
        mu1[r, a] = (mu1[r, a] * n + rewards[b, a, 0]) / (n + 1)
        mu2[r, a] = (mu2[r, a] * n + rewards[b, a, 1]) / (n + 1)
        counts[r, a] = n + 1
        arms[b] = a
        explored[b] = e


@njit(cache=True)
def ucb1_choose(counts, means, t, scale, u):
    K = counts.shape[0]
    idx = np.empty(K)
    everyone = np.ones(K, dtype=np.bool_)
    logt = math.log(t)
    for a in range(K):
        if counts[a] == 0:
            idx[a] = INF
        else:
            idx[a] = means[a] + scale * math.sqrt(2.0 * logt / counts[a])
    return argmax_random(idx, everyone, u)


@njit(cache=True)
def ucb1_play(rows, rewards, U, counts, means, tloc, scale, arms):
    for b in range(rows.shape[0]):
        r = rows[b]
        tloc[r] += 1
        a = ucb1_choose(counts[r], means[r], tloc[r], scale, U[b, 0])
        arms[b] = a
        n = counts[r, a]
        means[r, a] = (means[r, a] * n + rewards[b, a, 0]) / (n + 1)
        counts[r, a] = n + 1


@njit(cache=True)
def front_of(vals1, vals2):
    K = vals1.shape[0]
    front = np.ones(K, dtype=np.bool_)
    for a in range(K):
        for b in range(K):
            if b == a:
                continue
            if (
                vals1[b] >= vals1[a]
                and vals2[b] >= vals2[a]
                and (vals1[b] > vals1[a] or vals2[b] > vals2[a])
            ):
                front[a] = False
                break
    return front


@njit(cache=True)
def pucb_choose(counts, m1, m2, t, scale, u):
    K = counts.shape[0]
    for a in range(K):
        if counts[a] == 0:
            return a
    i1 = np.empty(K)
    i2 = np.empty(K)
    lg = math.log(t * (2.0 * K) ** 0.25)
    for a in range(K):
        w = scale * math.sqrt((2.0 / counts[a]) * lg)
        i1[a] = m1[a] + w
        i2[a] = m2[a] + w
    front = front_of(i1, i2)
    n = 0
    for a in range(K):
        if front[a]:
            n += 1
    k = pick_tied(u, n)
    for a in range(K):
        if front[a]:
            if k == 0:
                return a
            k -= 1
    return -1


@njit(cache=True)
def pucb_play(rows, rewards, U, counts, m1, m2, tloc, scale, arms):
    for b in range(rows.shape[0]):
        r = rows[b]
        tloc[r] += 1
        a = pucb_choose(counts[r], m1[r], m2[r], tloc[r], scale, U[b, 0])
        arms[b] = a
        n = counts[r, a]
        m1[r, a] = (m1[r, a] * n + rewards[b, a, 0]) / (n + 1)
        m2[r, a] = (m2[r, a] * n + rewards[b, a, 1]) / (n + 1)
        counts[r, a] = n + 1


@njit(cache=True)
def sucb_weight(tloc, n_weights, round_robin, u):
    if round_robin:
        return (tloc - 1) % n_weights
    return pick_tied(u, n_weights)


@njit(cache=True)
def sucb_play(rows, rewards, U, counts, means, tloc, tw, weights, round_robin, scale, arms, chosen_w):
    J = weights.shape[0]
    for b in range(rows.shape[0]):
        r = rows[b]
        tloc[r] += 1
        j = sucb_weight(tloc[r], J, round_robin, U[b, 0])
        tw[r, j] += 1
        a = ucb1_choose(counts[r, j], means[r, j], tw[r, j], scale, U[b, 1])
        arms[b] = a
        chosen_w[b] = j
        s = weights[j, 0] * rewards[b, a, 0] + weights[j, 1] * rewards[b, a, 1]
        n = counts[r, j, a]
        means[r, j, a] = (means[r, j, a] * n + s) / (n + 1)
        counts[r, j, a] = n + 1
