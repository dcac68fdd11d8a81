# neurite_growth/core/kernels.py
# Compiled inner loop of the density step: Lax-Friedrichs fluxes, reaction
# and dilution, and the tridiagonal solve of (hI + s A) f = rhs for f+ and f-
# Does NOT evaluate coupling functions, the boundary fluxes come in as numbers

import numpy as np
from numba import jit


@jit(nopython=True, cache=True)
def density_step(fp, fm, faces, L, dLdt, tau, h, kappa_v, kappa_D, kappa_lambda, rho_cap,
                 left_plus, right_plus, left_minus, right_minus):
    """One IMEX step of both densities of a neurite

    left_plus, right_plus, left_minus and right_minus are the boundary face
    fluxes including their κ factors and signs. Returns the new f+, f-, the
    L2 norms of the two changes, min f and max ρ of the new state.
    """
    n = fp.shape[0]
    flux_p = np.empty(n + 1)
    flux_m = np.empty(n + 1)
    flux_p[0] = left_plus
    flux_p[n] = right_plus
    flux_m[0] = left_minus
    flux_m[n] = right_minus
    for k in range(1, n):
        rho_face = 0.5 * (fp[k - 1] + fm[k - 1] + fp[k] + fm[k])
        drift = kappa_v * (1.0 - rho_face / rho_cap)
        shift = dLdt * faces[k]
        v_plus = drift - shift
        v_minus = -drift - shift
        flux_p[k] = 0.5 * v_plus * (fp[k - 1] + fp[k]) - 0.5 * (fp[k] - fp[k - 1])
        flux_m[k] = 0.5 * v_minus * (fm[k - 1] + fm[k]) - 0.5 * (fm[k] - fm[k - 1])

    scale = 1.0 / (h * L)
    dilution = dLdt / L
    new_p = np.empty(n)
    new_m = np.empty(n)
    for k in range(n):
        exchange = kappa_lambda * (fm[k] - fp[k])
        new_p[k] = h * (fp[k] + tau * (scale * (flux_p[k] - flux_p[k + 1])
                                       + exchange - dilution * fp[k]))
        new_m[k] = h * (fm[k] + tau * (scale * (flux_m[k] - flux_m[k + 1])
                                       - exchange - dilution * fm[k]))

    # Thomas algorithm, both columns share the matrix
    s = tau * kappa_D / (L * L)
    off = -s / h
    edge = h + s / h
    inner = h + 2.0 * s / h
    cp = np.empty(n)
    b = edge
    cp[0] = off / b
    new_p[0] /= b
    new_m[0] /= b
    for k in range(1, n):
        b = (edge if k == n - 1 else inner) - off * cp[k - 1]
        cp[k] = off / b
        new_p[k] = (new_p[k] - off * new_p[k - 1]) / b
        new_m[k] = (new_m[k] - off * new_m[k - 1]) / b
    for k in range(n - 2, -1, -1):
        new_p[k] -= cp[k] * new_p[k + 1]
        new_m[k] -= cp[k] * new_m[k + 1]

    change_p = 0.0
    change_m = 0.0
    min_f = np.inf
    max_rho = -np.inf
    for k in range(n):
        dp = new_p[k] - fp[k]
        dm = new_m[k] - fm[k]
        change_p += dp * dp
        change_m += dm * dm
        min_f = min(min_f, new_p[k], new_m[k])
        max_rho = max(max_rho, new_p[k] + new_m[k])
    return new_p, new_m, np.sqrt(change_p), np.sqrt(change_m), min_f, max_rho
