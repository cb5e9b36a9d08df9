"""Compiled inner loop of the stochastic dynamics.

Weights enter as integer numerators over a per-row denominator, so every
social cost is an exact int64 (scaled by that row's denominator). The pure
Python twin in ``dynamics._run_block_py`` follows the same statement order.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def social_cost_scaled(i, z, x, indptr, indices, nums):
    c = 0
    for p in range(indptr[i], indptr[i + 1]):
        c += nums[p] * abs(z - x[indices[p]])
    return c


@njit(cache=True)
def pareto_bounds(i, x, indptr, indices, nums, lo, hi, theta):
    xi = x[i]
    if xi == theta:
        return xi, xi
    step = 1 if theta > xi else -1
    reach = abs(xi - theta)
    base = social_cost_scaled(i, xi, x, indptr, indices, nums)
    far = xi
    z = xi + step
    while lo <= z <= hi and abs(z - theta) <= reach:
        if social_cost_scaled(i, z, x, indptr, indices, nums) > base:
            break
        far = z
        z += step
    if far < xi:
        return far, xi
    return xi, far


@njit(cache=True)
def is_equilibrium(x, indptr, indices, nums, theta):
    for i in range(x.shape[0]):
        xi = x[i]
        if xi == theta:
            continue
        step = 1 if theta > xi else -1
        if social_cost_scaled(i, xi + step, x, indptr, indices, nums) <= social_cost_scaled(
            i, xi, x, indptr, indices, nums
        ):
            return False
    return True


@njit(cache=True)
def choose(a, b, xi, u, exclude_current):
    size = b - a + 1
    if exclude_current and size > 1:
        z = a + int(u * (size - 1))
        if z >= xi:
            z += 1
        return z
    return a + int(u * size)


@njit(cache=True)
def run_block(
    x, nodes, us, t, max_steps, check_every, skip_first_check,
    indptr, indices, nums, lo, hi, theta, exclude_current, ev_node, ev_val,
):
    """Advance ``x`` in place using pre-drawn ``nodes``/``us``.

    Returns ``(t, status, used)``: status 1 = equilibrium detected at t,
    2 = max_steps reached, 0 = draws exhausted.
    """
    k = 0
    first = True
    while True:
        due = t % check_every == 0 or t >= max_steps
        if due and not (first and skip_first_check):
            if is_equilibrium(x, indptr, indices, nums, theta):
                return t, 1, k
        first = False
        if t >= max_steps:
            return t, 2, k
        if k >= nodes.shape[0]:
            return t, 0, k
        i = nodes[k]
        a, b = pareto_bounds(i, x, indptr, indices, nums, lo, hi, theta)
        z = choose(a, b, x[i], us[k], exclude_current)
        x[i] = z
        ev_node[k] = i
        ev_val[k] = z
        k += 1
        t += 1


def warmup():
    """Trigger compilation on a 1-node instance."""
    x = np.zeros(1, dtype=np.int64)
    indptr = np.array([0, 1], dtype=np.int64)
    one = np.ones(1, dtype=np.int64)
    zero = np.zeros(1, dtype=np.int64)
    run_block(x, zero, np.zeros(1), 0, 1, 1, False, indptr, zero, one, 0, 0, 0, False, zero.copy(), zero.copy())
