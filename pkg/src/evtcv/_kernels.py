"""Numba kernels for the two hot loops: tail-distribution MLE and CART.

The coverage and model-comparison test workloads run tens of thousands of
fits / tree builds, which rules out per-call scipy overhead.  The negative
log-likelihoods here must stay formula-identical to the public functions
in :mod:`evtcv.distributions`; ``tests/test_fitting.py`` asserts that.
"""

import math

import numpy as np
from numba import njit

from .distributions import GUMBEL_EPS

# objective ids for nelder_mead()
OBJ_GEV = 0      # theta = (xi, mu, log_sigma), data = sample
OBJ_GPD = 1      # theta = (xi, log_sigma),     data = excesses over u
OBJ_GUMBEL = 2   # theta = (mu, log_sigma),     data = sample


@njit(cache=True, nogil=True, error_model="numpy")
def neg_log_likelihood(obj, theta, data):
    n = data.size
    if obj == 0:
        xi, mu, s = theta[0], theta[1], theta[2]
        sigma = math.exp(s)
        if sigma <= 0.0 or sigma == math.inf:
            return np.inf
        total = n * s
        if abs(xi) < GUMBEL_EPS:
            for i in range(n):
                t = (data[i] - mu) / sigma
                total += t + math.exp(-t)
            return total
        c = 1.0 + 1.0 / xi
        for i in range(n):
            arg = xi * (data[i] - mu) / sigma
            if arg <= -1.0:
                return np.inf
            lb = math.log1p(arg)
            total += c * lb + math.exp(-lb / xi)
        return total
    if obj == 1:
        xi, s = theta[0], theta[1]
        sigma = math.exp(s)
        if sigma <= 0.0 or sigma == math.inf:
            return np.inf
        total = n * s
        if abs(xi) < GUMBEL_EPS:
            for i in range(n):
                total += data[i] / sigma
            return total
        c = 1.0 + 1.0 / xi
        for i in range(n):
            arg = xi * data[i] / sigma
            if arg <= -1.0:
                return np.inf
            total += c * math.log1p(arg)
        return total
    mu, s = theta[0], theta[1]
    sigma = math.exp(s)
    if sigma <= 0.0 or sigma == math.inf:
        return np.inf
    total = n * s
    for i in range(n):
        t = (data[i] - mu) / sigma
        total += t + math.exp(-t)
    return total


@njit(cache=True, nogil=True, error_model="numpy")
def nelder_mead(obj, data, x0, maxfev, xatol, fatol):
    """Downhill-simplex minimization of ``neg_log_likelihood``.

    Returns (x_best, f_best, nfev, converged).  Out-of-support points carry
    an infinite objective, which the simplex steps reject naturally.
    """
    ndim = x0.size
    sim = np.empty((ndim + 1, ndim))
    fval = np.empty(ndim + 1)
    sim[0] = x0
    for k in range(ndim):
        y = x0.copy()
        if y[k] != 0.0:
            y[k] = 1.05 * y[k]
        else:
            y[k] = 0.00025
        sim[k + 1] = y
    nfev = 0
    for k in range(ndim + 1):
        fval[k] = neg_log_likelihood(obj, sim[k], data)
        nfev += 1

    rho, chi, psi, shrink = 1.0, 2.0, 0.5, 0.5
    while nfev < maxfev:
        order = np.argsort(fval)
        sim = sim[order]
        fval = fval[order]

        xspread = 0.0
        for k in range(1, ndim + 1):
            for d in range(ndim):
                diff = abs(sim[k, d] - sim[0, d])
                if diff > xspread:
                    xspread = diff
        fspread = 0.0
        for k in range(1, ndim + 1):
            diff = abs(fval[k] - fval[0])
            if diff > fspread:
                fspread = diff
        if xspread <= xatol and fspread <= fatol:
            return sim[0], fval[0], nfev, True

        xbar = np.zeros(ndim)
        for k in range(ndim):
            xbar += sim[k]
        xbar /= ndim

        xr = (1.0 + rho) * xbar - rho * sim[ndim]
        fxr = neg_log_likelihood(obj, xr, data)
        nfev += 1
        if fxr < fval[0]:
            xe = (1.0 + rho * chi) * xbar - rho * chi * sim[ndim]
            fxe = neg_log_likelihood(obj, xe, data)
            nfev += 1
            if fxe < fxr:
                sim[ndim] = xe
                fval[ndim] = fxe
            else:
                sim[ndim] = xr
                fval[ndim] = fxr
        elif fxr < fval[ndim - 1]:
            sim[ndim] = xr
            fval[ndim] = fxr
        else:
            do_shrink = False
            if fxr < fval[ndim]:
                xc = (1.0 + psi * rho) * xbar - psi * rho * sim[ndim]
                fxc = neg_log_likelihood(obj, xc, data)
                nfev += 1
                if fxc <= fxr:
                    sim[ndim] = xc
                    fval[ndim] = fxc
                else:
                    do_shrink = True
            else:
                xcc = (1.0 - psi) * xbar + psi * sim[ndim]
                fxcc = neg_log_likelihood(obj, xcc, data)
                nfev += 1
                if fxcc < fval[ndim]:
                    sim[ndim] = xcc
                    fval[ndim] = fxcc
                else:
                    do_shrink = True
            if do_shrink:
                for k in range(1, ndim + 1):
                    sim[k] = sim[0] + shrink * (sim[k] - sim[0])
                    fval[k] = neg_log_likelihood(obj, sim[k], data)
                    nfev += 1

    order = np.argsort(fval)
    return sim[order[0]].copy(), fval[order[0]], nfev, False


# --- CART regression tree (variance-reduction splits) ---

@njit(cache=True, nogil=True)
def tree_build(X, y, max_depth, min_split):
    """Grow a CART regression tree; returns flat node arrays.

    Candidate thresholds are midpoints between consecutive distinct sorted
    feature values; the split maximizing the reduction of summed squared
    error wins, ties going to the lowest feature index and then the
    smallest threshold.  ``max_depth < 0`` means unlimited.

    Returns (feature, threshold, left, right, value, n_nodes); leaves have
    feature == -1.
    """
    n, n_feat = X.shape
    cap = 2 * n + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    value = np.zeros(cap, dtype=np.float64)

    idx = np.arange(n)
    buf = np.empty(n, dtype=np.int64)

    # stack rows: (node, start, end, depth)
    stack = np.empty((cap, 4), dtype=np.int64)
    stack[0] = (0, 0, n, 0)
    top = 1
    n_nodes = 1

    while top > 0:
        top -= 1
        node, start, end, depth = stack[top]
        m = end - start

        y_sum = 0.0
        y_sq = 0.0
        for i in range(start, end):
            yi = y[idx[i]]
            y_sum += yi
            y_sq += yi * yi
        mean = y_sum / m
        value[node] = mean

        pure = True
        y0 = y[idx[start]]
        for i in range(start + 1, end):
            if y[idx[i]] != y0:
                pure = False
                break
        if m < min_split or pure or (max_depth >= 0 and depth >= max_depth):
            continue

        sse_parent = y_sq - y_sum * y_sum / m
        best_gain = 0.0
        best_feat = -1
        best_thr = 0.0

        for f in range(n_feat):
            xs = np.empty(m)
            ys = np.empty(m)
            for i in range(m):
                xs[i] = X[idx[start + i], f]
                ys[i] = y[idx[start + i]]
            order = np.argsort(xs)

            cum_y = 0.0
            cum_y2 = 0.0
            for k in range(m - 1):
                j = order[k]
                cum_y += ys[j]
                cum_y2 += ys[j] * ys[j]
                xk = xs[j]
                xk1 = xs[order[k + 1]]
                if xk1 <= xk:
                    continue
                nl = k + 1
                nr = m - nl
                sse_l = cum_y2 - cum_y * cum_y / nl
                rs = y_sum - cum_y
                sse_r = (y_sq - cum_y2) - rs * rs / nr
                gain = sse_parent - sse_l - sse_r
                if gain > best_gain:
                    best_gain = gain
                    best_feat = f
                    best_thr = 0.5 * (xk + xk1)

        if best_feat < 0:
            continue

        # stable partition of idx[start:end] around the split
        nl = 0
        for i in range(start, end):
            if X[idx[i], best_feat] <= best_thr:
                buf[start + nl] = idx[i]
                nl += 1
        nr = 0
        for i in range(start, end):
            if X[idx[i], best_feat] > best_thr:
                buf[start + nl + nr] = idx[i]
                nr += 1
        for i in range(start, end):
            idx[i] = buf[i]

        lnode = n_nodes
        rnode = n_nodes + 1
        n_nodes += 2
        feature[node] = best_feat
        threshold[node] = best_thr
        left[node] = lnode
        right[node] = rnode
        stack[top] = (lnode, start, start + nl, depth + 1)
        top += 1
        stack[top] = (rnode, start + nl, end, depth + 1)
        top += 1

    return feature[:n_nodes], threshold[:n_nodes], left[:n_nodes], right[:n_nodes], value[:n_nodes], n_nodes


@njit(cache=True, nogil=True)
def tree_predict(feature, threshold, left, right, value, X):
    n = X.shape[0]
    out = np.empty(n)
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]
    return out
