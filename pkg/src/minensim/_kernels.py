"""Compiled inner loops for the sleep schedulers and the clusterers.

The schedulers evaluate population_size x max_iterations fitness values per
simulated round; each evaluation ORs bit-packed per-node coverage masks and
popcounts the result. Doing that per-particle in numpy is an order of
magnitude too slow for full-lifetime runs, so the sweep loops live here.
The EM and fuzzy c-means iteration loops live here for the same reason:
re-clustering happens every round, usually running to the iteration cap.

Semantics contract (pinned by tests against a pure-Python replica): fitness
accumulates awake energy left to right in node order, coverage ratios divide
exact integer cell counts, and every random number is consumed from the
pre-drawn arrays in the documented order. No fastmath; results are
bit-identical to the reference arithmetic.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

# SWAR popcount constants; everything stays uint64 to avoid integer promotion.
_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)
_S1 = np.uint64(1)
_S2 = np.uint64(2)
_S4 = np.uint64(4)
_S56 = np.uint64(56)


@njit(cache=True)
def _popcount64(x):
    x = x - ((x >> _S1) & _M1)
    x = (x & _M2) + ((x >> _S2) & _M2)
    x = (x + (x >> _S4)) & _M4
    return (x * _H01) >> _S56


@njit(cache=True)
def _awake_coverage(asleep, packed):
    """Number of cells covered by at least one awake node (exact count)."""
    n, width = packed.shape
    acc = np.zeros(width, np.uint64)
    for i in range(n):
        if not asleep[i]:
            for w in range(width):
                acc[w] |= packed[i, w]
    cnt = np.uint64(0)
    for w in range(width):
        cnt += _popcount64(acc[w])
    return float(cnt)


@njit(cache=True)
def solution_fitness(asleep, energies, packed, total_energy, total_coverage,
                     alpha, beta, coverage_preserving):
    n = asleep.shape[0]
    awake_e = 0.0
    for i in range(n):
        if not asleep[i]:
            awake_e += energies[i]
    if total_energy > 0.0:
        term1 = 1.0 - awake_e / total_energy
    else:
        term1 = 0.0
    if total_coverage > 0.0:
        ratio = _awake_coverage(asleep, packed) / total_coverage
        if coverage_preserving:
            term2 = ratio
        else:
            term2 = 1.0 - ratio
    else:
        term2 = 0.0
    return alpha * term1 + beta * term2


@njit(cache=True)
def eval_population(pop_asleep, energies, packed, total_energy, total_coverage,
                    alpha, beta, coverage_preserving):
    out = np.empty(pop_asleep.shape[0])
    for p in range(pop_asleep.shape[0]):
        out[p] = solution_fitness(pop_asleep[p], energies, packed, total_energy,
                                  total_coverage, alpha, beta, coverage_preserving)
    return out


@njit(cache=True)
def gso_generation(pop_asleep, local_best, global_best, lb_fit, gb_fit,
                   energies, packed, total_energy, total_coverage,
                   alpha, beta, coverage_preserving, mutation_rate,
                   r_mut, r_cross, r_gate):
    """One index-order sweep: mutate, best-guided crossover, best updates.

    Particle p crosses with local_best with probability 1 - p/pop, otherwise
    with global_best with probability p/pop (two independent gate draws).
    local_best persists across calls; global_best updates whenever local_best
    improves. Mutates pop_asleep, local_best, and global_best in place.
    """
    pop, n = pop_asleep.shape
    for p in range(pop):
        cur = pop_asleep[p]
        for i in range(n):
            if r_mut[p, i] < mutation_rate:
                cur[i] = not cur[i]
        rate_local = 1.0 - p / pop
        rate_global = p / pop
        if r_gate[p, 0] < rate_local:
            for i in range(n):
                if r_cross[p, i] >= 0.5:
                    cur[i] = local_best[i]
        elif r_gate[p, 1] < rate_global:
            for i in range(n):
                if r_cross[p, i] >= 0.5:
                    cur[i] = global_best[i]
        f = solution_fitness(cur, energies, packed, total_energy, total_coverage,
                             alpha, beta, coverage_preserving)
        if f > lb_fit:
            lb_fit = f
            for i in range(n):
                local_best[i] = cur[i]
            if f > gb_fit:
                gb_fit = f
                for i in range(n):
                    global_best[i] = cur[i]
    return lb_fit, gb_fit


@njit(cache=True)
def ga_generation(pop_asleep, new_pop, best, best_fit,
                  energies, packed, total_energy, total_coverage,
                  alpha, beta, coverage_preserving, mutation_rate,
                  r_parent, r_mut, r_cross):
    """Build one replacement generation: two distinct random parents per
    child, each mutated, then uniform crossover. Tracks the best-ever child.
    """
    pop, n = pop_asleep.shape
    for c in range(pop):
        p1 = int(r_parent[c, 0] * pop)
        if p1 >= pop:
            p1 = pop - 1
        off = 1 + int(r_parent[c, 1] * (pop - 1))
        if off >= pop:
            off = pop - 1
        p2 = (p1 + off) % pop
        for i in range(n):
            a = pop_asleep[p1, i] != (r_mut[c, 0, i] < mutation_rate)
            b = pop_asleep[p2, i] != (r_mut[c, 1, i] < mutation_rate)
            if r_cross[c, i] < 0.5:
                new_pop[c, i] = a
            else:
                new_pop[c, i] = b
        f = solution_fitness(new_pop[c], energies, packed, total_energy,
                             total_coverage, alpha, beta, coverage_preserving)
        if f > best_fit:
            best_fit = f
            for i in range(n):
                best[i] = new_pop[c, i]
    return best_fit


@njit(cache=True)
def pso_iteration(x, v, pbest, pbest_fit, gbest, gbest_fit,
                  energies, packed, total_energy, total_coverage,
                  alpha, beta, coverage_preserving,
                  omega, c1, c2, v_clamp, r1, r2, r_regen):
    """One binary-PSO step: velocity update with per-gene random factors,
    clamp, sigmoid gene regeneration, then pbest/gbest updates (gbest updates
    as soon as a particle beats it, so later particles in the same sweep pull
    toward the new best).
    """
    pop, n = x.shape
    for p in range(pop):
        for i in range(n):
            xi = 1.0 if x[p, i] else 0.0
            pb = 1.0 if pbest[p, i] else 0.0
            gb = 1.0 if gbest[i] else 0.0
            vi = omega * v[p, i] + c1 * r1[p, i] * (pb - xi) + c2 * r2[p, i] * (gb - xi)
            if vi > v_clamp:
                vi = v_clamp
            elif vi < -v_clamp:
                vi = -v_clamp
            v[p, i] = vi
            x[p, i] = r_regen[p, i] < 1.0 / (1.0 + math.exp(-vi))
        f = solution_fitness(x[p], energies, packed, total_energy, total_coverage,
                             alpha, beta, coverage_preserving)
        if f > pbest_fit[p]:
            pbest_fit[p] = f
            for i in range(n):
                pbest[p, i] = x[p, i]
            if f > gbest_fit:
                gbest_fit = f
                for i in range(n):
                    gbest[i] = x[p, i]
    return gbest_fit


@njit(cache=True)
def _cholesky_lower(a):
    """Lower-triangular Cholesky factor of a small SPD matrix."""
    d = a.shape[0]
    lower = np.zeros((d, d))
    for i in range(d):
        for j in range(i + 1):
            s = a[i, j]
            for t in range(j):
                s -= lower[i, t] * lower[j, t]
            if i == j:
                lower[i, i] = math.sqrt(s)
            else:
                lower[i, j] = s / lower[j, j]
    return lower


@njit(cache=True)
def gmm_em(features, means, cov, pis, max_iter, tol, reg):
    """Shared-covariance EM loop; mutates means/cov/pis in place.

    Per iteration: E-step via one Cholesky factorization and per-point
    forward substitution, log-likelihood recorded, convergence checked
    (improvement < tol), then the M-step. Returns the responsibilities of
    the final E-step plus the log-likelihood history and its length.
    """
    n, d = features.shape
    k = means.shape[0]
    resp = np.empty((n, k))
    logp = np.empty(k)
    scaled = np.empty(k)
    log_pis = np.empty(k)
    inv_lower = np.empty((d, d))
    hist = np.empty(max_iter)
    count = 0
    prev_ll = -np.inf
    for _ in range(max_iter):
        lower = _cholesky_lower(cov)
        logdet = 0.0
        for r in range(d):
            logdet += 2.0 * math.log(lower[r, r])
        # Invert the triangular factor once so the per-point solve is pure
        # multiply-adds (no divisions in the hot loop).
        for r in range(d):
            inv_lower[r, r] = 1.0 / lower[r, r]
            for t in range(r):
                s = 0.0
                for q in range(t, r):
                    s -= lower[r, q] * inv_lower[q, t]
                inv_lower[r, t] = s * inv_lower[r, r]
        log_norm = -0.5 * (d * math.log(2.0 * math.pi) + logdet)
        for i in range(k):
            log_pis[i] = math.log(pis[i])
        ll = 0.0
        for p in range(n):
            row_max = -np.inf
            for i in range(k):
                maha = 0.0
                for r in range(d):
                    s = 0.0
                    for t in range(r + 1):
                        s += inv_lower[r, t] * (features[p, t] - means[i, t])
                    maha += s * s
                v = log_norm - 0.5 * maha + log_pis[i]
                logp[i] = v
                if v > row_max:
                    row_max = v
            ssum = 0.0
            for i in range(k):
                e = math.exp(logp[i] - row_max)
                scaled[i] = e
                ssum += e
            log_row = row_max + math.log(ssum)
            ll += log_row
            for i in range(k):
                resp[p, i] = scaled[i] / ssum
        hist[count] = ll
        count += 1
        if ll - prev_ll < tol:
            break
        prev_ll = ll
        for i in range(k):
            w = 0.0
            for p in range(n):
                w += resp[p, i]
            safe = w if w > 1e-12 else 1e-12
            pi = w / n
            pis[i] = pi if pi > 1e-300 else 1e-300
            for r in range(d):
                s = 0.0
                for p in range(n):
                    s += resp[p, i] * features[p, r]
                means[i, r] = s / safe
        for r in range(d):
            for t in range(d):
                cov[r, t] = 0.0
        for i in range(k):
            for p in range(n):
                w = resp[p, i]
                for r in range(d):
                    dr = features[p, r] - means[i, r]
                    for t in range(d):
                        cov[r, t] += w * dr * (features[p, t] - means[i, t])
        for r in range(d):
            for t in range(d):
                cov[r, t] /= n
            cov[r, r] += reg
    return resp, hist, count


@njit(cache=True)
def fcm_loop(points, centroids, m, tol, max_iter):
    """Fuzzy c-means iteration loop; mutates centroids in place.

    Each iteration computes memberships (with the zero-distance one-hot
    guard), records the objective sum(u^m * d^2), updates centroids
    (skipping any with zero total weight), and stops when the largest
    centroid shift drops below tol. Returns the objective history and its
    length.
    """
    n, dim = points.shape
    c = centroids.shape[0]
    u = np.empty((n, c))
    d2 = np.empty(c)
    inv = np.empty(c)
    acc = np.empty(dim)
    quadratic = m == 2.0   # the default exponent; avoids libm pow entirely
    expo = -1.0 / (m - 1.0)
    hist = np.empty(max_iter)
    count = 0
    for _ in range(max_iter):
        obj = 0.0
        for p in range(n):
            first_zero = -1
            for i in range(c):
                s = 0.0
                for r in range(dim):
                    diff = points[p, r] - centroids[i, r]
                    s += diff * diff
                d2[i] = s
                if s <= 0.0 and first_zero < 0:
                    first_zero = i
            if first_zero >= 0:
                for i in range(c):
                    u[p, i] = 0.0
                u[p, first_zero] = 1.0
            else:
                ssum = 0.0
                for i in range(c):
                    iv = 1.0 / d2[i] if quadratic else d2[i] ** expo
                    inv[i] = iv
                    ssum += iv
                for i in range(c):
                    u[p, i] = inv[i] / ssum
            for i in range(c):
                w = u[p, i] * u[p, i] if quadratic else u[p, i] ** m
                obj += w * d2[i]
        hist[count] = obj
        count += 1
        shift = 0.0
        for i in range(c):
            denom = 0.0
            for r in range(dim):
                acc[r] = 0.0
            for p in range(n):
                w = u[p, i] * u[p, i] if quadratic else u[p, i] ** m
                denom += w
                for r in range(dim):
                    acc[r] += w * points[p, r]
            if denom > 0.0:
                for r in range(dim):
                    moved = acc[r] / denom
                    delta = abs(moved - centroids[i, r])
                    if delta > shift:
                        shift = delta
                    centroids[i, r] = moved
        if shift < tol:
            break
    return hist, count
