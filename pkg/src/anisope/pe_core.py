"""Right-hand sides of the regularized primitive equations with the pressure
eliminated.

The prognostic variables are the horizontal velocity ``v`` (even in z) and the
reduced temperature ``T`` (odd in z). Diagnostic fields:

* vertical velocity ``w = -int_{-h}^z div_H v``, odd and zero at z = +-h;
* surface pressure ``p_s = p_s0 + p_s1 + p_s2`` with zero horizontal mean, where
  ``p_s0`` is the vertical mean of ``int_{-h}^z T`` and ``p_s1``, ``p_s2`` solve
  ``-Delta_H p_s1 = div_H div_H <v (x) v>`` and
  ``-Delta_H p_s2 = div_H <f0 k x v>`` (``<.>`` the vertical mean).

Advection by the solenoidal pair (v, w) is written in skew-symmetric form and
every quadratic product is truncated with the 2/3 rule, so transport does no
work on the resolved modes.

The array kernels work on dealiased spectra; the ScalarField wrappers are the
public surface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .domain import Params, Parity, ScalarField, State
from .spectral import SpectralOps, ops_for


@dataclass(frozen=True, eq=False)
class DerivedFields:
    w: ScalarField
    ps: np.ndarray
    ps0: np.ndarray
    ps1: np.ndarray
    ps2: np.ndarray
    u: tuple  # (d_z v1, d_z v2), both odd


@dataclass
class Explicit:
    """Spectral explicit tendencies plus the intermediates reused by diagnostics."""

    n1: np.ndarray
    n2: np.ndarray
    nT: np.ndarray
    w: np.ndarray
    ps_planes: tuple  # (ps0, ps1, ps2) as 2-D spectra on the k_z = 0 plane


def _ps_planes(ops: SpectralOps, p11, p12, p22, v1h, v2h, ITh, f0):
    """2-D spectra (fft2 convention) of the three surface-pressure parts."""
    nz = ops.grid.nz
    kx, ky = ops.kx2d, ops.ky2d
    m11, m12, m22 = p11[:, :, 0] / nz, p12[:, :, 0] / nz, p22[:, :, 0] / nz
    V1, V2 = v1h[:, :, 0] / nz, v2h[:, :, 0] / nz
    ps1 = -(kx * kx * m11 + 2 * kx * ky * m12 + ky * ky * m22) * ops.inv_kh2_2d
    ps2 = f0 * (-ops.ikx2d * V2 + ops.iky2d * V1) * ops.inv_kh2_2d
    ps0 = ITh[:, :, 0] / nz
    ps0 = ps0.copy()
    ps0[0, 0] = 0.0
    return ps0, ps1, ps2


def explicit_terms(ops: SpectralOps, v1h, v2h, Th, f0: float) -> Explicit:
    """Advection, Coriolis, pressure and the ``-w/h`` source, all in spectral space.

    Inputs must be dealiased spectra of a state satisfying the barotropic
    constraint; outputs are dealiased.
    """
    inv, fwd, mask = ops.inv, ops.fwd, ops.mask
    h = ops.grid.h
    nz = ops.grid.nz

    v1, v2, T = inv(v1h), inv(v2h), inv(Th)
    div_h = ops.ikx * v1h + ops.iky * v2h
    div_h[:, :, 0] = 0.0  # barotropic divergence is zero up to round-off
    W, Wh = ops.antiderivative(div_h)
    w, wh = -W, -Wh

    v1x, v1y, v1z = inv(ops.ikx * v1h), inv(ops.iky * v1h), inv(ops.ikz * v1h)
    v2x, v2y, v2z = inv(ops.ikx * v2h), inv(ops.iky * v2h), inv(ops.ikz * v2h)
    Tx, Ty, Tz = inv(ops.ikx * Th), inv(ops.iky * Th), inv(ops.ikz * Th)

    p11 = mask * fwd(v1 * v1)
    p12 = mask * fwd(v1 * v2)
    p22 = mask * fwd(v2 * v2)
    pw1 = mask * fwd(w * v1)
    pw2 = mask * fwd(w * v2)
    pT1 = mask * fwd(v1 * T)
    pT2 = mask * fwd(v2 * T)
    pTw = mask * fwd(w * T)

    adv1 = fwd(v1 * v1x + v2 * v1y + w * v1z)
    adv2 = fwd(v1 * v2x + v2 * v2y + w * v2z)
    advT = fwd(v1 * Tx + v2 * Ty + w * Tz)

    flux1 = ops.ikx * p11 + ops.iky * p12 + ops.ikz * pw1
    flux2 = ops.ikx * p12 + ops.iky * p22 + ops.ikz * pw2
    fluxT = ops.ikx * pT1 + ops.iky * pT2 + ops.ikz * pTw

    T_hat = Th.copy()
    T_hat[:, :, 0] = 0.0
    _, ITh = ops.antiderivative(T_hat)

    planes = _ps_planes(ops, p11, p12, p22, v1h, v2h, ITh, f0)
    psh = np.zeros_like(v1h)
    psh[:, :, 0] = nz * (planes[0] + planes[1] + planes[2])
    phi = psh - ITh  # p_s - int_{-h}^z T

    n1 = -0.5 * (adv1 + flux1) + f0 * v2h - ops.ikx * phi
    n2 = -0.5 * (adv2 + flux2) - f0 * v1h - ops.iky * phi
    nT = -0.5 * (advT + fluxT) - wh / h
    return Explicit(mask * n1, mask * n2, mask * nT, w, planes)


def linear_symbol(ops: SpectralOps, eps: float) -> np.ndarray:
    """Fourier symbol of ``Delta_H + eps d_z^2`` (shared by v and T)."""
    return -ops.kh2 - eps * ops.kz2


def project_hat(ops: SpectralOps, v1h, v2h):
    """Remove the curl-free part of the barotropic (k_z = 0) mode, in place."""
    kx, ky = ops.ikx2d, ops.iky2d
    V1, V2 = v1h[:, :, 0], v2h[:, :, 0]
    # grad (div V) / Delta with the spectral gradient i k
    div = kx * V1 + ky * V2
    phi = -div * ops.inv_kp2_2d
    v1h[:, :, 0] = V1 - kx * phi
    v2h[:, :, 0] = V2 - ky * phi
    return v1h, v2h


# ---------------------------------------------------------------------------
# public ScalarField surface


def _spectra(state: State):
    ops = ops_for(state.grid)
    v1, v2, T = state.arrays
    return ops, ops.fwd(v1), ops.fwd(v2), ops.fwd(T)


def barotropic_project(v):
    """Leray projection of the vertical mean of ``v``; the baroclinic part is untouched."""
    v1, v2 = v
    ops = ops_for(v1.grid)
    v1h, v2h = project_hat(ops, ops.fwd(v1.values), ops.fwd(v2.values))
    return (v1.with_values(ops.inv(v1h)), v2.with_values(ops.inv(v2h)))


def diagnose_w(v) -> ScalarField:
    """``w = -int_{-h}^z div_H v``; raises if ``v`` violates the barotropic constraint."""
    from .spectral import z_antiderivative

    v1, v2 = v
    ops = ops_for(v1.grid)
    div = ops.inv(ops.ikx * ops.fwd(v1.values) + ops.iky * ops.fwd(v2.values))
    W = z_antiderivative(ScalarField(v1.grid, v1.parity * v2.parity, div))
    return W.with_values(-W.values)


def solve_ps(v, T: ScalarField, f0: float):
    """Surface pressure and its three parts as 2-D arrays with zero horizontal mean."""
    v1, v2 = v
    ops = ops_for(T.grid)
    mask = ops.mask
    v1h, v2h = ops.fwd(v1.values), ops.fwd(v2.values)
    p11 = mask * ops.fwd(v1.values * v1.values)
    p12 = mask * ops.fwd(v1.values * v2.values)
    p22 = mask * ops.fwd(v2.values * v2.values)
    Th = ops.fwd(T.values)
    Th[:, :, 0] = 0.0
    _, ITh = ops.antiderivative(Th)
    parts = [sfft.ifft2(p).real for p in _ps_planes(ops, p11, p12, p22, v1h, v2h, ITh, f0)]
    return parts[0] + parts[1] + parts[2], parts[0], parts[1], parts[2]


def pressure_gradient(T: ScalarField, ps: np.ndarray):
    """``grad_H (p_s - int_{-h}^z T)`` as a pair of even fields."""
    from .spectral import z_antiderivative

    ops = ops_for(T.grid)
    IT = z_antiderivative(T).values
    phi = np.asarray(ps)[:, :, None] - IT
    phih = ops.fwd(phi)
    parity = Parity.EVEN if T.parity is Parity.ODD else Parity.NONE
    return (
        ScalarField(T.grid, parity, ops.inv(ops.ikx * phih)),
        ScalarField(T.grid, parity, ops.inv(ops.iky * phih)),
    )


def _full_tendency(state: State, params: Params):
    ops, v1h, v2h, Th = _spectra(state)
    v1h, v2h, Th = ops.mask * v1h, ops.mask * v2h, ops.mask * Th
    ex = explicit_terms(ops, v1h, v2h, Th, params.f0)
    L = linear_symbol(ops, params.eps)
    return ops, ex.n1 + L * v1h, ex.n2 + L * v2h, ex.nT + L * Th


def momentum_rhs(state: State, params: Params):
    """Tendency of v: transport, Coriolis, pressure, horizontal and eps-vertical viscosity."""
    ops, t1, t2, _ = _full_tendency(state, params)
    g = state.grid
    return (ScalarField(g, Parity.EVEN, ops.inv(t1)), ScalarField(g, Parity.EVEN, ops.inv(t2)))


def temperature_rhs(state: State, params: Params) -> ScalarField:
    ops, _, _, tT = _full_tendency(state, params)
    return ScalarField(state.grid, Parity.ODD, ops.inv(tT))


def derive(state: State, params: Params) -> DerivedFields:
    """All diagnostic fields of a state."""
    from .spectral import derivative

    w = diagnose_w(state.v)
    ps, ps0, ps1, ps2 = solve_ps(state.v, state.T, params.f0)
    u = (derivative(state.v1, "z"), derivative(state.v2, "z"))
    return DerivedFields(w, ps, ps0, ps1, ps2, u)
