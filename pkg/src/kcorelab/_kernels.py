"""Event-loop kernels, JIT-compiled when numba is available.

Both kernels are plain nopython-compatible Python so the package still
works (slowly) without a working numba install.  All randomness is drawn
by the caller and passed in as arrays, which keeps runs reproducible and
the kernels trivially thread-safe.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


@njit(cache=True)
def peel_kernel(adj, off, deg, k):
    """Iteratively remove vertices of degree < k; deg is mutated in place.

    adj/off is CSR adjacency with every edge listed from both endpoints
    (a loop lists its vertex twice).  Returns the removed-flag array;
    afterwards deg[v] is the degree of v inside the surviving subgraph.
    """
    n = deg.shape[0]
    removed = np.zeros(n, np.uint8)
    queue = np.empty(n, np.int64)
    qt = 0
    for v in range(n):
        if deg[v] < k:
            removed[v] = 1
            queue[qt] = v
            qt += 1
    qh = 0
    while qh < qt:
        v = queue[qh]
        qh += 1
        for ii in range(off[v], off[v + 1]):
            u = adj[ii]
            if removed[u] == 0:
                deg[u] -= 1
                if deg[u] == k - 1:
                    removed[u] = 1
                    queue[qt] = u
                    qt += 1
    return removed


@njit(cache=True)
def death_process_kernel(ball_bin, bin_start, d, death_order, death_time,
                         uniforms, k, grid, t_max, want_final):
    """Run the continuous-time ball-death peeling process.

    Balls are numbered consecutively per bin: bin v owns the index block
    [bin_start[v], bin_start[v] + d[v]) and ball_bin maps each ball back
    to its bin.  death_order/death_time list all balls in increasing
    order of their i.i.d. exponential death times; uniforms supplies one
    uniform per recoloring decision.

    Trajectory values (L, H, B) are recorded right-continuously at the
    grid times; after the stopping time they freeze at the final values
    with L = -1 by convention.  Returns
    (L, H, B, tau, stopped, H_end, B_end, alive) where alive holds the
    per-bin ball counts at exit and tau is NaN until the stop occurred.
    """
    n = d.shape[0]
    nballs = ball_bin.shape[0]
    nevents = death_order.shape[0]
    G = grid.shape[0]
    out_l = np.zeros(G, np.int64)
    out_h = np.zeros(G, np.int64)
    out_b = np.zeros(G, np.int64)

    alive = d.copy()
    dead = np.zeros(nballs, np.uint8)
    red = np.zeros(nballs, np.uint8)
    lw = np.empty(nballs, np.int64)   # light white balls, swap-removed
    lpos = np.full(nballs, -1, np.int64)
    lsize = 0
    H = 0
    B = 0
    for v in range(n):
        if d[v] >= k:
            B += 1
            H += d[v]
        else:
            for b in range(bin_start[v], bin_start[v] + d[v]):
                lw[lsize] = b
                lpos[b] = lsize
                lsize += 1

    if lsize == 0:
        # nothing is light: the whole graph is its own core, tau = 0
        for gi in range(G):
            out_l[gi] = -1
            out_h[gi] = H
            out_b[gi] = B
        return out_l, out_h, out_b, 0.0, True, H, B, alive

    uidx = 0
    # initial step: one uniformly chosen light ball turns red at time 0
    j = int(uniforms[uidx] * lsize)
    uidx += 1
    if j >= lsize:
        j = lsize - 1
    b0 = lw[j]
    last = lw[lsize - 1]
    lw[j] = last
    lpos[last] = j
    lpos[b0] = -1
    lsize -= 1
    red[b0] = 1

    gi = 0
    tau = np.nan
    stopped = False
    for ev in range(nevents):
        t = death_time[ev]
        while gi < G and grid[gi] < t:
            out_l[gi] = lsize
            out_h[gi] = H
            out_b[gi] = B
            gi += 1
        if not want_final and (gi >= G or t > t_max):
            return out_l, out_h, out_b, tau, stopped, H, B, alive
        b = death_order[ev]
        v = ball_bin[b]
        dead[b] = 1
        was_white = red[b] == 0
        if alive[v] >= k:
            # heavy bin: the ball is white and heavy
            alive[v] -= 1
            H -= 1
            if alive[v] == k - 1:
                # the bin turns light; its survivors become light white
                B -= 1
                H -= k - 1
                for c in range(bin_start[v], bin_start[v] + d[v]):
                    if dead[c] == 0:
                        lw[lsize] = c
                        lpos[c] = lsize
                        lsize += 1
        else:
            alive[v] -= 1
            if was_white:
                j = lpos[b]
                last = lw[lsize - 1]
                lw[j] = last
                lpos[last] = j
                lpos[b] = -1
                lsize -= 1
        if was_white:
            if lsize == 0:
                tau = t
                stopped = True
                break
            j = int(uniforms[uidx] * lsize)
            uidx += 1
            if j >= lsize:
                j = lsize - 1
            c = lw[j]
            last = lw[lsize - 1]
            lw[j] = last
            lpos[last] = j
            lpos[c] = -1
            lsize -= 1
            red[c] = 1
    while gi < G:
        out_l[gi] = -1 if stopped else lsize
        out_h[gi] = H
        out_b[gi] = B
        gi += 1
    return out_l, out_h, out_b, tau, stopped, H, B, alive


@njit(cache=True)
def fill_csr_kernel(adj, pos, us, vs):
    """Scatter both endpoints of each edge into a CSR adjacency array."""
    for i in range(us.shape[0]):
        u = us[i]
        v = vs[i]
        adj[pos[u]] = v
        pos[u] += 1
        adj[pos[v]] = u
        pos[v] += 1
