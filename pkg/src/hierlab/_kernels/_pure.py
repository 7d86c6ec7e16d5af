"""Pure-Python implementations of the hot kernels.

These mirror ``_fast.pyx`` operation for operation so the two backends agree to
rounding; they are the fallback when the compiled extension is unavailable.
"""

import math
from collections import deque

import numpy as np

NAME = "python"


def brandes_betweenness(indptr, indices, n):
    indptr = indptr.tolist()
    indices = indices.tolist()
    bc = [0.0] * n
    for s in range(n):
        stack = []
        preds = [[] for _ in range(n)]
        sigma = [0.0] * n
        dist = [-1] * n
        sigma[s] = 1.0
        dist[s] = 0
        q = deque([s])
        while q:
            v = q.popleft()
            stack.append(v)
            dv = dist[v]
            for w in indices[indptr[v]:indptr[v + 1]]:
                if dist[w] < 0:
                    dist[w] = dv + 1
                    q.append(w)
                if dist[w] == dv + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = [0.0] * n
        while stack:
            w = stack.pop()
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
            if w != s:
                bc[w] += delta[w]
    return np.array(bc) / 2.0


def transport_cost(a, b, cost, tol=1e-14):
    """Exact optimal transport cost via successive shortest augmenting paths.

    ``a`` and ``b`` must have equal totals. Dijkstra with node potentials runs on
    the residual bipartite graph; every augmentation exhausts a supply, a demand
    or a backward arc, so the loop terminates.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    cost = np.asarray(cost, dtype=float)
    if cost.shape[0] > cost.shape[1]:
        a, b, cost = b, a, cost.T
    m, k = cost.shape
    shift = float(cost.min()) if cost.size else 0.0
    c = cost - shift
    supply = a.copy()
    demand = b.copy()
    flow = np.zeros((m, k))
    pi_s = np.zeros(m)
    pi_t = np.zeros(k)
    inf = math.inf

    while True:
        active = supply > tol
        if not active.any() or not (demand > tol).any():
            break
        dist_s = np.where(active, 0.0, inf)
        dist_t = np.full(k, inf)
        prev_t = np.full(k, -1)
        prev_s = np.full(m, -1)
        done_s = np.zeros(m, dtype=bool)
        done_t = np.zeros(k, dtype=bool)
        target = -1
        while True:
            ds = np.where(done_s, inf, dist_s)
            dt = np.where(done_t, inf, dist_t)
            i = int(np.argmin(ds))
            j = int(np.argmin(dt))
            if ds[i] == inf and dt[j] == inf:
                break
            if ds[i] <= dt[j]:
                done_s[i] = True
                red = c[i] + pi_s[i] - pi_t
                cand = ds[i] + np.maximum(red, 0.0)
                better = (cand < dist_t) & ~done_t
                dist_t[better] = cand[better]
                prev_t[better] = i
            else:
                done_t[j] = True
                if demand[j] > tol:
                    target = j
                    break
                back = flow[:, j] > tol
                red = -c[:, j] + pi_t[j] - pi_s
                cand = dt[j] + np.maximum(red, 0.0)
                better = back & (cand < dist_s) & ~done_s
                dist_s[better] = cand[better]
                prev_s[better] = j
        if target < 0:
            break
        D = dist_t[target]
        pi_s += np.minimum(dist_s, D)
        pi_t += np.minimum(dist_t, D)

        # walk back to the root source to find the bottleneck
        delta = demand[target]
        j = target
        while True:
            i = prev_t[j]
            if prev_s[i] < 0:
                root = i
                break
            j2 = prev_s[i]
            delta = min(delta, flow[i, j2])
            j = j2
        delta = min(delta, supply[root])

        j = target
        while True:
            i = prev_t[j]
            flow[i, j] += delta
            if i == root:
                break
            j2 = prev_s[i]
            flow[i, j2] -= delta
            if flow[i, j2] <= tol:
                flow[i, j2] = 0.0
            j = j2
        supply[root] -= delta
        demand[target] -= delta
        if supply[root] <= tol:
            supply[root] = 0.0
        if demand[target] <= tol:
            demand[target] = 0.0

    return float((flow * c).sum() + shift * flow.sum())


def _dist_grad(x, y, c, dim):
    """Poincare distance d(x, y) and its gradient with respect to x."""
    sx = 0.0
    sy = 0.0
    sd = 0.0
    for t in range(dim):
        sx += x[t] * x[t]
        sy += y[t] * y[t]
        diff = x[t] - y[t]
        sd += diff * diff
    al = 1.0 - c * sx
    be = 1.0 - c * sy
    gam = 1.0 + 2.0 * c * sd / (al * be)
    if gam < 1.0:
        gam = 1.0
    sqc = math.sqrt(c)
    d = math.acosh(gam) / sqc
    den = gam * gam - 1.0
    if den < 1e-30:
        den = 1e-30
    scale = 4.0 * c / (be * al * al * sqc * math.sqrt(den))
    g = [0.0] * dim
    for t in range(dim):
        g[t] = scale * (al * (x[t] - y[t]) + c * sd * x[t])
    return d, g


def _sample_negatives(u, cand_row, nbrs, n, k_neg):
    """Accept candidates that are neither u, a neighbour of u, nor repeats."""
    chosen = []
    maxavail = n - 1 - len(nbrs)
    want = k_neg if k_neg < maxavail else maxavail
    if want <= 0:
        return chosen
    last = u
    for w in cand_row:
        if len(chosen) >= want:
            break
        last = w
        if w == u or w in chosen or _contains(nbrs, w):
            continue
        chosen.append(w)
    w = last
    while len(chosen) < want:
        w = w + 1
        if w >= n:
            w = 0
        if w == u or w in chosen or _contains(nbrs, w):
            continue
        chosen.append(w)
    return chosen


def _contains(sorted_list, x):
    lo, hi = 0, len(sorted_list)
    while lo < hi:
        mid = (lo + hi) // 2
        if sorted_list[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo < len(sorted_list) and sorted_list[lo] == x


def _update(p, g, lr, c, maxnorm, dim):
    sq = 0.0
    for t in range(dim):
        sq += p[t] * p[t]
    f = (1.0 - c * sq)
    f = f * f / 4.0
    sq = 0.0
    for t in range(dim):
        p[t] = p[t] - lr * f * g[t]
        sq += p[t] * p[t]
    nrm = math.sqrt(sq)
    if nrm > maxnorm:
        r = maxnorm / nrm
        for t in range(dim):
            p[t] = p[t] * r


def poincare_epoch(points, pos_u, pos_v, neg_cand, indptr, indices, lr, c, eps, k_neg):
    """One pass of Riemannian SGD over the positive pairs, in the given order.

    Updates ``points`` in place and returns the summed negative log-softmax loss.
    """
    n, dim = points.shape
    P = points.tolist()
    indptr_l = indptr.tolist()
    indices_l = indices.tolist()
    cand = neg_cand.tolist()
    maxnorm = (1.0 - eps) / math.sqrt(c)
    total = 0.0
    for e in range(len(pos_u)):
        u = int(pos_u[e])
        v = int(pos_v[e])
        nbrs = indices_l[indptr_l[u]:indptr_l[u + 1]]
        negs = _sample_negatives(u, cand[e], nbrs, n, k_neg)
        others = [v] + negs
        pu = P[u]
        ds = []
        gus = []
        gos = []
        for w in others:
            d, gu = _dist_grad(pu, P[w], c, dim)
            _, gw = _dist_grad(P[w], pu, c, dim)
            ds.append(d)
            gus.append(gu)
            gos.append(gw)
        mn = ds[0]
        for d in ds:
            if d < mn:
                mn = d
        z = 0.0
        ex = []
        for d in ds:
            val = math.exp(mn - d)
            ex.append(val)
            z += val
        total += ds[0] - mn + math.log(z)
        grad_u = [0.0] * dim
        coeffs = []
        for j in range(len(others)):
            coef = -ex[j] / z
            if j == 0:
                coef += 1.0
            coeffs.append(coef)
            for t in range(dim):
                grad_u[t] += coef * gus[j][t]
        for j, w in enumerate(others):
            gw = [coeffs[j] * x for x in gos[j]]
            _update(P[w], gw, lr, c, maxnorm, dim)
        _update(pu, grad_u, lr, c, maxnorm, dim)
    points[:, :] = np.array(P, dtype=float).reshape(n, dim)
    return total


def hop_cost_matrix(indptr, indices, a_nodes, b_nodes, cap):
    """Hop distances between node sets, exact up to ``cap`` and inf beyond.

    BFS from each row node is truncated at ``cap - 1``; a column node is then at
    ``min(dist(b), 1 + min over neighbours y of dist(y))``.
    """
    indptr = indptr.tolist() if hasattr(indptr, "tolist") else indptr
    indices = indices.tolist() if hasattr(indices, "tolist") else indices
    inf = math.inf
    out = np.full((len(a_nodes), len(b_nodes)), inf)
    for r, a in enumerate(a_nodes):
        a = int(a)
        dist = {a: 0}
        frontier = [a]
        for level in range(1, cap):
            nxt = []
            for x in frontier:
                for y in indices[indptr[x]:indptr[x + 1]]:
                    if y not in dist:
                        dist[y] = level
                        nxt.append(y)
            frontier = nxt
        row = out[r]
        for s, b in enumerate(b_nodes):
            b = int(b)
            best = dist.get(b, inf)
            if best > 1:
                for y in indices[indptr[b]:indptr[b + 1]]:
                    dy = dist.get(y)
                    if dy is not None and dy + 1 < best:
                        best = dy + 1
            if best <= cap:
                row[s] = best
    return out
