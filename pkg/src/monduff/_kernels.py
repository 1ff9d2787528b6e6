"""numba kernels for the Euler-Maruyama integration hot loop.

The drift and noise evaluations are the same njit scalar cores used by the
public model operations, so the fast path and the reference `step` path are
bit-identical.
"""

from numba import njit

from .model import (FIELD_SEMICLASSICAL, _drift_core, _noise_core)

import math

STATUS_OK = 0
STATUS_GUARD = 1
STATUS_ESCAPE = 2


@njit(cache=True)
def em_step_core(field_kind, t, x, p, chi, pi, dw, h,
                 beta, gamma, g, omega, phi, coupling_sign, fp_literal):
    """One Euler-Maruyama step; noise enters the centroid pair only."""
    dx, dp, dchi, dpi = _drift_core(field_kind, t, x, p, chi, pi,
                                    beta, gamma, g, omega, phi,
                                    coupling_sign, fp_literal)
    if field_kind == FIELD_SEMICLASSICAL:
        n_x, n_p = _noise_core(chi, pi, math.cos(phi), math.sin(phi))
        w = math.sqrt(gamma) * dw
        x1 = x + dx * h + n_x * w
        p1 = p + dp * h + n_p * w
    else:
        x1 = x + dx * h
        p1 = p + dp * h
    return x1, p1, chi + dchi * h, pi + dpi * h


@njit(cache=True)
def run_steps(field_kind, x, p, chi, pi, n0, n_steps, h, dw,
              beta, gamma, g, omega, phi, coupling_sign, fp_literal,
              chi_min, escape, rec, rec_stride, rec_offset):
    """Advance absolute steps n0 .. n0+n_steps-1 (caller slices dw to chunk).

    rec[j - rec_offset] receives the state after absolute step n when (n+1)
    is a multiple of rec_stride, with j = (n+1) // rec_stride (the row for
    the initial state is the caller's). Returns (status, steps_done, x, p,
    chi, pi); on a non-OK status the returned state is the one *before* the
    failing step.
    """
    for k in range(n_steps):
        n = n0 + k
        t = n * h
        x1, p1, chi1, pi1 = em_step_core(field_kind, t, x, p, chi, pi, dw[k], h,
                                         beta, gamma, g, omega, phi,
                                         coupling_sign, fp_literal)
        if not (math.isfinite(x1) and math.isfinite(p1)
                and math.isfinite(chi1) and math.isfinite(pi1)):
            return STATUS_ESCAPE, k, x, p, chi, pi
        if abs(x1) > escape or abs(p1) > escape:
            return STATUS_ESCAPE, k, x, p, chi, pi
        if chi1 <= chi_min:
            return STATUS_GUARD, k, x, p, chi, pi
        x, p, chi, pi = x1, p1, chi1, pi1
        if rec_stride > 0 and (n + 1) % rec_stride == 0:
            j = (n + 1) // rec_stride - rec_offset
            rec[j, 0] = x
            rec[j, 1] = p
            rec[j, 2] = chi
            rec[j, 3] = pi
    return STATUS_OK, n_steps, x, p, chi, pi
