"""Hot numeric kernels.

Every routine here is a tight loop over numpy arrays, JIT-compiled with
numba when available. Set ``VITALITY_NUMBA=0`` to force the interpreted
numpy path (same code, same operation order, bit-identical results);
``VITALITY_NUMBA=1`` requires numba and fails loudly if it is missing.
The default ``auto`` uses numba when importable.

``benchmarks/bench_kernels.py`` compares both paths.
"""

from __future__ import annotations

import os

import numpy as np


def _resolve_backend() -> bool:
    flag = os.environ.get("VITALITY_NUMBA", "auto").strip().lower()
    if flag in ("0", "off", "false", "no"):
        return False
    if flag in ("1", "on", "true", "yes"):
        import numba  # noqa: F401  (raises if unavailable, by request)

        return True
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


USING_NUMBA = _resolve_backend()

if USING_NUMBA:
    from numba import njit
else:

    def njit(*args, **kwargs):
        """No-op decorator standing in for numba.njit."""

        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn

        return wrap


def unjitted(fn):
    """Return the plain-Python version of a kernel (itself when not jitted)."""
    return getattr(fn, "py_func", fn)


# ---------------------------------------------------------------------------
# CART split search


@njit(cache=True)
def best_split(X, y, rows, feats, min_leaf):
    """Best variance-reducing split over candidate features.

    Returns (feature, threshold, decrease); feature == -1 when no split
    strictly reduces impurity with both children >= min_leaf. Candidate
    features must be sorted ascending: ties on decrease keep the first
    (lowest feature, then lowest threshold) candidate seen.
    """
    n = rows.shape[0]
    s = 0.0
    ss = 0.0
    for i in range(n):
        v = y[rows[i]]
        s += v
        ss += v * v
    parent_var = ss / n - (s / n) ** 2

    best_gain = 0.0
    best_feat = -1
    best_thresh = 0.0
    vals = np.empty(n, dtype=np.float64)
    for fi in range(feats.shape[0]):
        f = feats[fi]
        for i in range(n):
            vals[i] = X[rows[i], f]
        order = np.argsort(vals)
        ls = 0.0
        lss = 0.0
        for i in range(n - 1):
            v = y[rows[order[i]]]
            ls += v
            lss += v * v
            lo = vals[order[i]]
            hi = vals[order[i + 1]]
            if lo == hi:
                continue
            nl = i + 1
            nr = n - nl
            if nl < min_leaf or nr < min_leaf:
                continue
            rs = s - ls
            rss = ss - lss
            lvar = lss / nl - (ls / nl) ** 2
            rvar = rss / nr - (rs / nr) ** 2
            gain = parent_var - (nl * lvar + nr * rvar) / n
            if gain > best_gain:
                best_gain = gain
                best_feat = f
                best_thresh = (lo + hi) / 2.0
    return best_feat, best_thresh, best_gain


@njit(cache=True)
def predict_tree(left, right, feature, threshold, value, X, out):
    """Evaluate one tree for every row of X (left branch is x <= threshold)."""
    n = X.shape[0]
    for i in range(n):
        node = 0
        while left[node] != -1:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]


# ---------------------------------------------------------------------------
# Exact path-dependent Shapley values for one tree (iterative form of the
# extend/unwind decision-path recursion).


@njit(cache=True)
def _unwound_sum(zf, of, pw, ud, i):
    one_fraction = of[i]
    zero_fraction = zf[i]
    next_one = pw[ud]
    total = 0.0
    for j in range(ud - 1, -1, -1):
        if one_fraction != 0.0:
            tmp = next_one * (ud + 1) / ((j + 1) * one_fraction)
            total += tmp
            next_one = pw[j] - tmp * zero_fraction * (ud - j) / (ud + 1)
        else:
            total += (pw[j] / zero_fraction) / ((ud - j) / (ud + 1))
    return total


@njit(cache=True)
def tree_shap_single(left, right, feature, threshold, value, nsamp, x, phi, max_depth):
    """Accumulate exact Shapley values of one tree at sample x into phi."""
    slots = max_depth + 2
    levels = max_depth + 2
    fidx = np.empty((levels, slots), dtype=np.int64)
    zf = np.empty((levels, slots), dtype=np.float64)
    of = np.empty((levels, slots), dtype=np.float64)
    pw = np.empty((levels, slots), dtype=np.float64)

    cap = 2 * levels + 2
    st_node = np.empty(cap, dtype=np.int64)
    st_ud = np.empty(cap, dtype=np.int64)
    st_pz = np.empty(cap, dtype=np.float64)
    st_po = np.empty(cap, dtype=np.float64)
    st_pi = np.empty(cap, dtype=np.int64)
    st_level = np.empty(cap, dtype=np.int64)

    top = 0
    st_node[top] = 0
    st_ud[top] = 0
    st_pz[top] = 1.0
    st_po[top] = 1.0
    st_pi[top] = -1
    st_level[top] = 0
    top += 1

    while top > 0:
        top -= 1
        node = st_node[top]
        ud = st_ud[top]
        pz = st_pz[top]
        po = st_po[top]
        pi = st_pi[top]
        level = st_level[top]

        if level > 0:
            for j in range(ud):
                fidx[level, j] = fidx[level - 1, j]
                zf[level, j] = zf[level - 1, j]
                of[level, j] = of[level - 1, j]
                pw[level, j] = pw[level - 1, j]

        # extend the decision path with this branch's fractions
        fidx[level, ud] = pi
        zf[level, ud] = pz
        of[level, ud] = po
        pw[level, ud] = 1.0 if ud == 0 else 0.0
        for j in range(ud - 1, -1, -1):
            pw[level, j + 1] += po * pw[level, j] * (j + 1) / (ud + 1)
            pw[level, j] = pz * pw[level, j] * (ud - j) / (ud + 1)

        if left[node] == -1:
            leaf = value[node]
            for j in range(1, ud + 1):
                w = _unwound_sum(zf[level], of[level], pw[level], ud, j)
                phi[fidx[level, j]] += w * (of[level, j] - zf[level, j]) * leaf
            continue

        split = feature[node]
        if x[split] <= threshold[node]:
            hot = left[node]
            cold = right[node]
        else:
            hot = right[node]
            cold = left[node]
        w = nsamp[node]
        hot_zero = nsamp[hot] / w
        cold_zero = nsamp[cold] / w
        iz = 1.0
        io = 1.0

        # undo any earlier split on the same feature along this path
        k = 0
        found = False
        while k <= ud:
            if fidx[level, k] == split:
                found = True
                break
            k += 1
        if found:
            iz = zf[level, k]
            io = of[level, k]
            one_fraction = of[level, k]
            zero_fraction = zf[level, k]
            next_one = pw[level, ud]
            for j in range(ud - 1, -1, -1):
                if one_fraction != 0.0:
                    tmp = pw[level, j]
                    pw[level, j] = next_one * (ud + 1) / ((j + 1) * one_fraction)
                    next_one = tmp - pw[level, j] * zero_fraction * (ud - j) / (ud + 1)
                else:
                    pw[level, j] = pw[level, j] * (ud + 1) / (zero_fraction * (ud - j))
            # weights were rewritten above; only the entry fields shift down
            for j in range(k, ud):
                fidx[level, j] = fidx[level, j + 1]
                zf[level, j] = zf[level, j + 1]
                of[level, j] = of[level, j + 1]
            ud -= 1

        # cold branch pushed first so the hot branch is explored first
        st_node[top] = cold
        st_ud[top] = ud + 1
        st_pz[top] = cold_zero * iz
        st_po[top] = 0.0
        st_pi[top] = split
        st_level[top] = level + 1
        top += 1
        st_node[top] = hot
        st_ud[top] = ud + 1
        st_pz[top] = hot_zero * iz
        st_po[top] = io
        st_pi[top] = split
        st_level[top] = level + 1
        top += 1


# ---------------------------------------------------------------------------
# Lloyd iterations from fixed initial centroids


@njit(cache=True)
def kmeans_lloyd(points, init, max_iter, tol):
    """Lloyd's algorithm; ties assign to the lowest cluster index.

    Returns (labels, centroids, inertia_history, n_iter, empty_seen):
    inertia_history[i] is the within-cluster sum of squared distances
    measured against the centroids the assignment used; an empty cluster
    keeps its previous centroid and is flagged in empty_seen.
    """
    n, d = points.shape
    k = init.shape[0]
    cent = init.copy()
    labels = np.zeros(n, dtype=np.int64)
    history = np.empty(max_iter, dtype=np.float64)
    empty_seen = np.zeros(k, dtype=np.bool_)
    counts = np.zeros(k, dtype=np.int64)
    newc = np.zeros((k, d), dtype=np.float64)
    n_iter = 0

    for it in range(max_iter):
        inertia = 0.0
        for i in range(n):
            best = 0
            bd = np.inf
            for c in range(k):
                dist = 0.0
                for j in range(d):
                    diff = points[i, j] - cent[c, j]
                    dist += diff * diff
                if dist < bd:
                    bd = dist
                    best = c
            labels[i] = best
            inertia += bd
        history[it] = inertia
        n_iter = it + 1

        for c in range(k):
            counts[c] = 0
            for j in range(d):
                newc[c, j] = 0.0
        for i in range(n):
            c = labels[i]
            counts[c] += 1
            for j in range(d):
                newc[c, j] += points[i, j]
        move = 0.0
        for c in range(k):
            if counts[c] == 0:
                empty_seen[c] = True
                for j in range(d):
                    newc[c, j] = cent[c, j]
            else:
                for j in range(d):
                    newc[c, j] /= counts[c]
            dist = 0.0
            for j in range(d):
                diff = newc[c, j] - cent[c, j]
                dist += diff * diff
            dist = np.sqrt(dist)
            if dist > move:
                move = dist
        for c in range(k):
            for j in range(d):
                cent[c, j] = newc[c, j]
        if move < tol:
            break

    return labels, cent, history[:n_iter].copy(), n_iter, empty_seen


# ---------------------------------------------------------------------------
# Silhouette samples, O(n^2)


@njit(cache=True)
def silhouette_samples(points, labels, k):
    """Per-point silhouette (b - a) / max(a, b); singleton clusters get 0."""
    n, d = points.shape
    counts = np.zeros(k, dtype=np.int64)
    for i in range(n):
        counts[labels[i]] += 1
    s = np.zeros(n, dtype=np.float64)
    sums = np.empty(k, dtype=np.float64)
    for i in range(n):
        own = labels[i]
        if counts[own] == 1:
            s[i] = 0.0
            continue
        for c in range(k):
            sums[c] = 0.0
        for j in range(n):
            if j == i:
                continue
            dist = 0.0
            for t in range(d):
                diff = points[i, t] - points[j, t]
                dist += diff * diff
            sums[labels[j]] += np.sqrt(dist)
        a = sums[own] / (counts[own] - 1)
        b = np.inf
        for c in range(k):
            if c == own or counts[c] == 0:
                continue
            mean_c = sums[c] / counts[c]
            if mean_c < b:
                b = mean_c
        denom = max(a, b)
        if denom > 0.0:
            s[i] = (b - a) / denom
    return s


# ---------------------------------------------------------------------------
# KNN imputation fill


@njit(cache=True)
def knn_impute_fill(matrix, observed, k):
    """Fill missing cells from the unweighted mean of the k nearest donors.

    Distances use only mutually observed columns, normalised by the
    intersection size (root mean squared coordinate difference); donors are
    rows with the target column observed; ties at the k-th distance keep the
    lower row index. Reads only original observed values, never fresh fills.
    """
    n, p = matrix.shape
    out = matrix.copy()
    dist = np.empty(n, dtype=np.float64)
    used = np.empty(n, dtype=np.bool_)
    for c in range(p):
        for r in range(n):
            if observed[r, c]:
                continue
            for q in range(n):
                dist[q] = np.inf
                used[q] = True
            for q in range(n):
                if q == r or not observed[q, c]:
                    continue
                m = 0
                acc = 0.0
                for j in range(p):
                    if observed[r, j] and observed[q, j]:
                        diff = matrix[r, j] - matrix[q, j]
                        acc += diff * diff
                        m += 1
                if m > 0:
                    dist[q] = np.sqrt(acc / m)
                used[q] = False
            total = 0.0
            for _ in range(k):
                best = -1
                bd = np.inf
                for q in range(n):
                    if not used[q] and dist[q] < bd:
                        bd = dist[q]
                        best = q
                used[best] = True
                total += matrix[best, c]
            out[r, c] = total / k
    return out


# ---------------------------------------------------------------------------
# Even-odd point-in-polygon with inclusive boundary


@njit(cache=True)
def point_in_rings(px, py, xs, ys, offsets):
    """Even-odd containment over a set of closed rings; boundary counts in."""
    inside = False
    for r in range(offsets.shape[0] - 1):
        start = offsets[r]
        end = offsets[r + 1]
        for i in range(start, end - 1):
            x1 = xs[i]
            y1 = ys[i]
            x2 = xs[i + 1]
            y2 = ys[i + 1]
            cross = (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1)
            if cross == 0.0:
                lox = x1 if x1 < x2 else x2
                hix = x2 if x1 < x2 else x1
                loy = y1 if y1 < y2 else y2
                hiy = y2 if y1 < y2 else y1
                if lox <= px <= hix and loy <= py <= hiy:
                    return True
            if (y1 > py) != (y2 > py):
                xin = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
                if px < xin:
                    inside = not inside
    return inside
