# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; semantics match ``_pure.py`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, acosh, exp, log, INFINITY
from libc.stdlib cimport malloc, free

cnp.import_array()

NAME = "cython"


def brandes_betweenness(const long long[::1] indptr, const long long[::1] indices, Py_ssize_t n):
    cdef double[::1] bc = np.zeros(n)
    cdef double[::1] sigma = np.zeros(n)
    cdef double[::1] delta = np.zeros(n)
    cdef long long[::1] dist = np.empty(n, dtype=np.int64)
    cdef long long[::1] order = np.empty(n, dtype=np.int64)
    # predecessors stored per BFS as flat edge slots aligned with indices
    cdef Py_ssize_t s, head, tail, v, w, k, i
    cdef long long dv
    cdef double coeff
    for s in range(n):
        for i in range(n):
            sigma[i] = 0.0
            delta[i] = 0.0
            dist[i] = -1
        sigma[s] = 1.0
        dist[s] = 0
        head = 0
        tail = 0
        order[tail] = s
        tail += 1
        while head < tail:
            v = order[head]
            head += 1
            dv = dist[v]
            for k in range(indptr[v], indptr[v + 1]):
                w = indices[k]
                if dist[w] < 0:
                    dist[w] = dv + 1
                    order[tail] = w
                    tail += 1
                if dist[w] == dv + 1:
                    sigma[w] += sigma[v]
        # reverse BFS order; predecessors of w are neighbours one level closer
        for i in range(tail - 1, -1, -1):
            w = order[i]
            coeff = (1.0 + delta[w]) / sigma[w]
            for k in range(indptr[w], indptr[w + 1]):
                v = indices[k]
                if dist[v] == dist[w] - 1:
                    delta[v] += sigma[v] * coeff
            if w != s:
                bc[w] += delta[w]
    return np.asarray(bc) / 2.0


def transport_cost(a, b, cost, double tol=1e-14):
    cost = np.asarray(cost, dtype=np.float64)
    if cost.shape[0] > cost.shape[1]:
        a, b, cost = b, a, cost.T
    cdef double[::1] sup = np.array(a, dtype=np.float64)
    cdef double[::1] dem = np.array(b, dtype=np.float64)
    cdef double[:, ::1] c = np.ascontiguousarray(cost, dtype=np.float64).copy()
    cdef Py_ssize_t m = c.shape[0], k = c.shape[1]
    cdef double shift = 0.0
    cdef Py_ssize_t i, j, i2, j2, bi, bj, target, root
    if m == 0 or k == 0:
        return 0.0
    shift = c[0, 0]
    for i in range(m):
        for j in range(k):
            if c[i, j] < shift:
                shift = c[i, j]
    for i in range(m):
        for j in range(k):
            c[i, j] -= shift
    cdef double[:, ::1] flow = np.zeros((m, k))
    cdef double[::1] pi_s = np.zeros(m)
    cdef double[::1] pi_t = np.zeros(k)
    cdef double[::1] dist_s = np.empty(m)
    cdef double[::1] dist_t = np.empty(k)
    cdef long long[::1] prev_s = np.empty(m, dtype=np.int64)
    cdef long long[::1] prev_t = np.empty(k, dtype=np.int64)
    cdef char[::1] done_s = np.empty(m, dtype=np.int8)
    cdef char[::1] done_t = np.empty(k, dtype=np.int8)
    cdef double best_s, best_t, red, cand, D, dlt
    cdef bint any_s, any_t

    while True:
        any_s = False
        any_t = False
        for i in range(m):
            if sup[i] > tol:
                any_s = True
        for j in range(k):
            if dem[j] > tol:
                any_t = True
        if not any_s or not any_t:
            break
        for i in range(m):
            dist_s[i] = 0.0 if sup[i] > tol else INFINITY
            prev_s[i] = -1
            done_s[i] = 0
        for j in range(k):
            dist_t[j] = INFINITY
            prev_t[j] = -1
            done_t[j] = 0
        target = -1
        while True:
            best_s = INFINITY
            bi = 0
            for i in range(m):
                if not done_s[i] and dist_s[i] < best_s:
                    best_s = dist_s[i]
                    bi = i
            best_t = INFINITY
            bj = 0
            for j in range(k):
                if not done_t[j] and dist_t[j] < best_t:
                    best_t = dist_t[j]
                    bj = j
            if best_s == INFINITY and best_t == INFINITY:
                break
            if best_s <= best_t:
                done_s[bi] = 1
                for j in range(k):
                    if done_t[j]:
                        continue
                    red = c[bi, j] + pi_s[bi] - pi_t[j]
                    if red < 0.0:
                        red = 0.0
                    cand = best_s + red
                    if cand < dist_t[j]:
                        dist_t[j] = cand
                        prev_t[j] = bi
            else:
                done_t[bj] = 1
                if dem[bj] > tol:
                    target = bj
                    break
                for i in range(m):
                    if done_s[i] or not flow[i, bj] > tol:
                        continue
                    red = -c[i, bj] + pi_t[bj] - pi_s[i]
                    if red < 0.0:
                        red = 0.0
                    cand = best_t + red
                    if cand < dist_s[i]:
                        dist_s[i] = cand
                        prev_s[i] = bj
        if target < 0:
            break
        D = dist_t[target]
        for i in range(m):
            pi_s[i] += dist_s[i] if dist_s[i] < D else D
        for j in range(k):
            pi_t[j] += dist_t[j] if dist_t[j] < D else D

        dlt = dem[target]
        j = target
        while True:
            i = prev_t[j]
            if prev_s[i] < 0:
                root = i
                break
            j2 = prev_s[i]
            if flow[i, j2] < dlt:
                dlt = flow[i, j2]
            j = j2
        if sup[root] < dlt:
            dlt = sup[root]

        j = target
        while True:
            i = prev_t[j]
            flow[i, j] += dlt
            if i == root:
                break
            j2 = prev_s[i]
            flow[i, j2] -= dlt
            if flow[i, j2] <= tol:
                flow[i, j2] = 0.0
            j = j2
        sup[root] -= dlt
        dem[target] -= dlt
        if sup[root] <= tol:
            sup[root] = 0.0
        if dem[target] <= tol:
            dem[target] = 0.0

    cdef double total = 0.0, fsum = 0.0
    for i in range(m):
        for j in range(k):
            total += flow[i, j] * c[i, j]
            fsum += flow[i, j]
    return total + shift * fsum


cdef double _dist_grad(double[:, ::1] P, Py_ssize_t xi, Py_ssize_t yi, double c,
                       Py_ssize_t dim, double* g) noexcept nogil:
    cdef double sx = 0.0, sy = 0.0, sd = 0.0, diff, al, be, gam, sqc, d, den, scale
    cdef Py_ssize_t t
    for t in range(dim):
        sx += P[xi, t] * P[xi, t]
        sy += P[yi, t] * P[yi, t]
        diff = P[xi, t] - P[yi, t]
        sd += diff * diff
    al = 1.0 - c * sx
    be = 1.0 - c * sy
    gam = 1.0 + 2.0 * c * sd / (al * be)
    if gam < 1.0:
        gam = 1.0
    sqc = sqrt(c)
    d = acosh(gam) / sqc
    den = gam * gam - 1.0
    if den < 1e-30:
        den = 1e-30
    scale = 4.0 * c / (be * al * al * sqc * sqrt(den))
    for t in range(dim):
        g[t] = scale * (al * (P[xi, t] - P[yi, t]) + c * sd * P[xi, t])
    return d


cdef bint _contains(const long long[::1] indices, Py_ssize_t lo, Py_ssize_t hi, long long x) noexcept nogil:
    cdef Py_ssize_t mid
    cdef Py_ssize_t end = hi
    while lo < hi:
        mid = (lo + hi) // 2
        if indices[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo < end and indices[lo] == x


cdef bint _in(long long* arr, Py_ssize_t cnt, long long x) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(cnt):
        if arr[i] == x:
            return True
    return False


cdef void _update(double[:, ::1] P, Py_ssize_t pi, double* g, double lr, double c,
                  double maxnorm, Py_ssize_t dim) noexcept nogil:
    cdef double sq = 0.0, f, nrm, r
    cdef Py_ssize_t t
    for t in range(dim):
        sq += P[pi, t] * P[pi, t]
    f = (1.0 - c * sq)
    f = f * f / 4.0
    sq = 0.0
    for t in range(dim):
        P[pi, t] = P[pi, t] - lr * f * g[t]
        sq += P[pi, t] * P[pi, t]
    nrm = sqrt(sq)
    if nrm > maxnorm:
        r = maxnorm / nrm
        for t in range(dim):
            P[pi, t] = P[pi, t] * r


def poincare_epoch(double[:, ::1] points, const long long[::1] pos_u, const long long[::1] pos_v,
                   const long long[:, ::1] neg_cand, const long long[::1] indptr,
                   const long long[::1] indices, double lr, double c, double eps, Py_ssize_t k_neg):
    cdef Py_ssize_t n = points.shape[0], dim = points.shape[1]
    cdef Py_ssize_t npos = pos_u.shape[0], ncand = neg_cand.shape[1]
    cdef double maxnorm = (1.0 - eps) / sqrt(c)
    cdef double total = 0.0
    cdef long long* others = <long long*> malloc((k_neg + 1) * sizeof(long long))
    cdef double* ds = <double*> malloc((k_neg + 1) * sizeof(double))
    cdef double* ex = <double*> malloc((k_neg + 1) * sizeof(double))
    cdef double* gus = <double*> malloc((k_neg + 1) * dim * sizeof(double))
    cdef double* gos = <double*> malloc((k_neg + 1) * dim * sizeof(double))
    cdef double* grad_u = <double*> malloc(dim * sizeof(double))
    cdef double* tmp = <double*> malloc(dim * sizeof(double))
    cdef Py_ssize_t e, u, v, lo, hi, cnt, want, maxavail, jj, j, t
    cdef long long w, last
    cdef double mn, z, coef
    try:
        with nogil:
            for e in range(npos):
                u = pos_u[e]
                v = pos_v[e]
                lo = indptr[u]
                hi = indptr[u + 1]
                others[0] = v
                cnt = 0
                maxavail = n - 1 - (hi - lo)
                want = k_neg if k_neg < maxavail else maxavail
                if want > 0:
                    last = u
                    for jj in range(ncand):
                        if cnt >= want:
                            break
                        w = neg_cand[e, jj]
                        last = w
                        if w == u or _in(others + 1, cnt, w) or _contains(indices, lo, hi, w):
                            continue
                        others[1 + cnt] = w
                        cnt += 1
                    w = last
                    while cnt < want:
                        w = w + 1
                        if w >= n:
                            w = 0
                        if w == u or _in(others + 1, cnt, w) or _contains(indices, lo, hi, w):
                            continue
                        others[1 + cnt] = w
                        cnt += 1
                for j in range(cnt + 1):
                    ds[j] = _dist_grad(points, u, others[j], c, dim, gus + j * dim)
                    _dist_grad(points, others[j], u, c, dim, gos + j * dim)
                mn = ds[0]
                for j in range(cnt + 1):
                    if ds[j] < mn:
                        mn = ds[j]
                z = 0.0
                for j in range(cnt + 1):
                    ex[j] = exp(mn - ds[j])
                    z += ex[j]
                total += ds[0] - mn + log(z)
                for t in range(dim):
                    grad_u[t] = 0.0
                for j in range(cnt + 1):
                    coef = -ex[j] / z
                    if j == 0:
                        coef += 1.0
                    ex[j] = coef
                    for t in range(dim):
                        grad_u[t] += coef * gus[j * dim + t]
                for j in range(cnt + 1):
                    for t in range(dim):
                        tmp[t] = ex[j] * gos[j * dim + t]
                    _update(points, others[j], tmp, lr, c, maxnorm, dim)
                _update(points, u, grad_u, lr, c, maxnorm, dim)
    finally:
        free(others)
        free(ds)
        free(ex)
        free(gus)
        free(gos)
        free(grad_u)
        free(tmp)
    return total


def hop_cost_matrix(const long long[::1] indptr, const long long[::1] indices,
                    a_nodes, b_nodes, long long cap):
    cdef long long[::1] A = np.ascontiguousarray(a_nodes, dtype=np.int64)
    cdef long long[::1] B = np.ascontiguousarray(b_nodes, dtype=np.int64)
    cdef Py_ssize_t na = A.shape[0], nb = B.shape[0], n = indptr.shape[0] - 1
    out_arr = np.full((na, nb), np.inf)
    cdef double[:, ::1] out = out_arr
    cdef long long[::1] dist = np.full(n, -1, dtype=np.int64)
    cdef long long[::1] queue = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t r, s, head, tail, k, x, y, b, a
    cdef long long best, dy
    for r in range(na):
        a = A[r]
        head = 0
        tail = 0
        dist[a] = 0
        queue[tail] = a
        tail += 1
        while head < tail:
            x = queue[head]
            head += 1
            if dist[x] >= cap - 1:
                continue
            for k in range(indptr[x], indptr[x + 1]):
                y = indices[k]
                if dist[y] < 0:
                    dist[y] = dist[x] + 1
                    queue[tail] = y
                    tail += 1
        for s in range(nb):
            b = B[s]
            best = dist[b] if dist[b] >= 0 else cap + 1
            if best > 1:
                for k in range(indptr[b], indptr[b + 1]):
                    dy = dist[indices[k]]
                    if dy >= 0 and dy + 1 < best:
                        best = dy + 1
            if best <= cap:
                out[r, s] = best
        for k in range(tail):
            dist[queue[k]] = -1
    return out_arr
