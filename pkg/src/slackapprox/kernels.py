"""Hot loops. Pure numpy, compiled with numba when available (see ``_jit``).

Everything here takes and returns plain float64/int64 arrays so the same
source works with and without numba.
"""
import numpy as np

from ._jit import NUMBA_ENABLED, maybe_njit

# ADMM status codes
OPTIMAL = 0
INFEASIBLE = 1
MAX_ITERS = 2
NUMERICAL = 3

_ZERO = 0
_ORTHANT = 1
_SOC = 2
_FREE = 3   # dual of a zero block


@maybe_njit
def project_blocks(x, kinds, dims):
    """Euclidean projection onto a product of zero/orthant/SOC blocks."""
    out = np.empty_like(x)
    off = 0
    for b in range(kinds.shape[0]):
        d = dims[b]
        k = kinds[b]
        seg = x[off:off + d]
        if k == _ZERO:
            out[off:off + d] = 0.0
        elif k == _FREE:
            out[off:off + d] = seg
        elif k == _ORTHANT:
            out[off:off + d] = np.maximum(seg, 0.0)
        else:
            t = seg[0]
            z = seg[1:]
            nz = np.sqrt(np.dot(z, z))
            if nz <= t:
                out[off:off + d] = seg
            elif nz <= -t:
                out[off:off + d] = 0.0
            else:
                a = 0.5 * (t + nz)
                out[off] = a
                out[off + 1:off + d] = (a / nz) * z
        off += d
    return out


@maybe_njit
def _inf_norm(x):
    if x.shape[0] == 0:
        return 0.0
    return np.max(np.abs(x))


@maybe_njit
def admm(G, h, c, kinds, dims, Q, lam, tol, max_iters, alpha, rho, sigma,
         adapt_every, stall_iters):
    """Solve ``min c^T u  s.t.  h - G u in K`` by over-relaxed ADMM.

    ``Q diag(lam) Q^T`` is the eigendecomposition of ``G^T G``; with it the
    u-update is a diagonal solve for any penalty, so residual balancing never
    refactors. The multiplier ``y`` stays in K* and ``y^T s = 0`` at every
    iterate, which makes ``-h^T y`` a dual objective.
    """
    k, d = G.shape
    u = np.zeros(d)
    s = project_blocks(h.copy(), kinds, dims)
    y = np.zeros(k)
    GT = G.T.copy()
    QT = Q.T.copy()
    status = MAX_ITERS
    it = 0
    rp = np.inf
    rd = np.inf
    gap = np.inf
    y_prev = np.zeros(k)
    dual_kinds = kinds.copy()
    for b in range(kinds.shape[0]):
        if kinds[b] == _ZERO:
            dual_kinds[b] = _FREE
    inf_tol = 1e-6
    stall = 0
    next_adapt = adapt_every
    check_every = 5
    hn = _inf_norm(h)
    cn = _inf_norm(c)
    for it in range(1, max_iters + 1):
        rhs = GT @ (rho * (h - s) - y) + sigma * u - c
        u = Q @ ((QT @ rhs) / (rho * lam + sigma))
        Gu = G @ u
        Gu_rel = alpha * Gu + (1.0 - alpha) * (h - s)
        v = h - Gu_rel - y / rho
        s = project_blocks(v, kinds, dims)
        y = y + rho * (Gu_rel + s - h)

        if not np.all(np.isfinite(u)):
            status = NUMERICAL
            break
        if it % check_every != 0 and it != max_iters:
            continue

        r = Gu + s - h
        rp_abs = _inf_norm(r)
        GTy = GT @ y
        rd_abs = _inf_norm(c + GTy)
        pobj = np.dot(c, u)
        dobj = -np.dot(h, y)
        rp = rp_abs / (1.0 + max(hn, max(_inf_norm(Gu), _inf_norm(s))))
        rd = rd_abs / (1.0 + max(cn, _inf_norm(GTy)))
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        if rp <= tol and rd <= tol and gap <= tol:
            status = OPTIMAL
            break

        # infeasibility: successive multiplier steps approach a Farkas
        # certificate dy in K*, G^T dy = 0, h^T dy < 0 and stay there
        dy = y - y_prev
        y_prev = y.copy()
        dyn = _inf_norm(dy)
        cert = False
        if rp > 10.0 * tol and dyn > 1e-12:
            dist = _inf_norm(dy - project_blocks(dy, dual_kinds, dims))
            cert = (_inf_norm(GT @ dy) <= inf_tol * dyn and np.dot(h, dy) < -inf_tol * dyn
                    and dist <= inf_tol * dyn)
        if cert:
            stall += check_every
            if stall >= stall_iters:
                status = INFEASIBLE
                break
        else:
            stall = 0

        # balancing checks at adapt_every * 2^j: finitely many rho changes,
        # so a 2-cycle in rho cannot stall convergence
        if adapt_every > 0 and it >= next_adapt:
            next_adapt *= 2
            ratio = np.sqrt(rp / max(rd, 1e-300))
            if ratio > 5.0 or ratio < 0.2:
                rho = min(max(rho * min(max(ratio, 0.01), 100.0), 1e-6), 1e6)
    return u, s, y, status, it, rp, rd, gap, rho


@maybe_njit
def power_iteration(M, x0, max_iters, tol):
    """Leading eigenpair of a symmetric PSD matrix from start ``x0``."""
    x = x0 / np.sqrt(np.dot(x0, x0))
    ev = 0.0
    for it in range(1, max_iters + 1):
        y = M @ x
        ny = np.sqrt(np.dot(y, y))
        if ny == 0.0:
            return x, 0.0, it, True
        y = y / ny
        diff = np.sqrt(np.dot(y - x, y - x))
        x = y
        ev = ny
        if diff <= tol:
            y2 = M @ x
            return x, np.dot(x, y2), it, True
    return x, ev, max_iters, False


# entries this small are dead; flushing them avoids subnormal arithmetic
NMF_FLUSH = 1e-200


def nmf_numpy(S, W, Hm, max_iters, tol, target, check_monotone, record):
    """Lee-Seung updates for ``min ||S - W Hm||_F`` with ``W, Hm >= 0`` (numpy)."""
    eps = 1e-300
    trace = np.empty(max_iters + 1 if record else 1)
    R = S - W @ Hm
    err = np.sqrt(np.sum(R * R))
    # rounding noise once the fit is exact
    floor = 1e-14 * np.sqrt(np.sum(S * S))
    trace[0] = err
    its = 0
    monotone = True
    for it in range(1, max_iters + 1):
        Hm = Hm * (W.T @ S) / (W.T @ W @ Hm + eps)
        Hm[Hm < NMF_FLUSH] = 0.0
        W = W * (S @ Hm.T) / (W @ (Hm @ Hm.T) + eps)
        W[W < NMF_FLUSH] = 0.0
        R = S - W @ Hm
        new = np.sqrt(np.sum(R * R))
        if record:
            trace[it] = new
        its = it
        if check_monotone and new > err * (1.0 + 1e-12) + floor:
            monotone = False
        stop = err == 0.0 or (err - new) <= tol * err or new <= target
        err = new
        if stop:
            break
    return W, Hm, err, its, trace[:its + 1] if record else trace, monotone


def _nmf_loops(S, W, Hm, max_iters, tol, target, check_monotone, record):
    # explicit loops: for desk-scale matrices this beats BLAS calls by ~5x
    eps = 1e-300
    f, v = S.shape
    m = W.shape[1]
    trace = np.empty(max_iters + 1 if record else 1)
    WtS = np.empty((m, v))
    WtW = np.empty((m, m))
    SHt = np.empty((f, m))
    HHt = np.empty((m, m))
    row = np.empty(m)
    col = np.empty(m)

    def frob(S, W, Hm):
        acc = 0.0
        for i in range(f):
            for j in range(v):
                r = S[i, j]
                for k in range(m):
                    r -= W[i, k] * Hm[k, j]
                acc += r * r
        return np.sqrt(acc)

    err = frob(S, W, Hm)
    floor = 1e-14 * np.sqrt(np.sum(S * S))
    trace[0] = err
    its = 0
    monotone = True
    for it in range(1, max_iters + 1):
        for a in range(m):
            for j in range(v):
                acc = 0.0
                for i in range(f):
                    acc += W[i, a] * S[i, j]
                WtS[a, j] = acc
            for b in range(m):
                acc = 0.0
                for i in range(f):
                    acc += W[i, a] * W[i, b]
                WtW[a, b] = acc
        for j in range(v):
            for a in range(m):
                den = 0.0
                for b in range(m):
                    den += WtW[a, b] * Hm[b, j]
                val = Hm[a, j] * WtS[a, j] / (den + eps)
                col[a] = val if val >= NMF_FLUSH else 0.0
            for a in range(m):
                Hm[a, j] = col[a]
        for a in range(m):
            for i in range(f):
                acc = 0.0
                for j in range(v):
                    acc += S[i, j] * Hm[a, j]
                SHt[i, a] = acc
            for b in range(m):
                acc = 0.0
                for j in range(v):
                    acc += Hm[a, j] * Hm[b, j]
                HHt[a, b] = acc
        for i in range(f):
            for a in range(m):
                den = 0.0
                for b in range(m):
                    den += W[i, b] * HHt[b, a]
                val = W[i, a] * SHt[i, a] / (den + eps)
                row[a] = val if val >= NMF_FLUSH else 0.0
            for a in range(m):
                W[i, a] = row[a]
        new = frob(S, W, Hm)
        if record:
            trace[it] = new
        its = it
        if check_monotone and new > err * (1.0 + 1e-12) + floor:
            monotone = False
        stop = err == 0.0 or (err - new) <= tol * err or new <= target
        err = new
        if stop:
            break
    return W, Hm, err, its, trace[:its + 1] if record else trace, monotone


if NUMBA_ENABLED:
    nmf_multiplicative = maybe_njit(_nmf_loops)
else:
    nmf_multiplicative = nmf_numpy
