"""Fourier kernels on the periodic box.

Fields are transformed with a real-to-complex FFT over (x, y, z); the z axis
carries the Hermitian half. Horizontal wavenumbers are ``2 pi m`` and vertical
ones ``pi m / h``. The ``k_z = 0`` plane of a 3-D transform is the full 2-D
transform of the z-sum, which is how vertical means and surface fields are
handled without extra transforms.

Odd-order derivatives drop the Nyquist mode of the differentiated axis so that
they stay real and skew-adjoint.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from .domain import Grid, Parity, ScalarField
from .errors import NonZeroMeanError, NonZeroVerticalMeanError

MEAN_TOL = 1e-10

def _signed_modes(n: int) -> np.ndarray:
    return np.fft.fftfreq(n, 1.0 / n)


class SpectralOps:
    """Wavenumber tables and transforms for one grid (use :func:`ops_for`)."""

    def __init__(self, grid: Grid):
        self.grid = grid
        nx, ny, nz = grid.shape
        mx = _signed_modes(nx)
        my = _signed_modes(ny)
        mz = np.arange(nz // 2 + 1, dtype=float)
        self.kx = (2 * np.pi * mx)[:, None, None]
        self.ky = (2 * np.pi * my)[None, :, None]
        self.kz = (np.pi / grid.h * mz)[None, None, :]

        def odd(k, m, n):
            k = k.copy()
            k[np.abs(m.reshape(k.shape)) == n // 2] = 0.0
            return 1j * k

        self.ikx = odd(self.kx, mx, nx)
        self.iky = odd(self.ky, my, ny)
        self.ikz = odd(self.kz, mz, nz)
        self.kh2 = self.kx**2 + self.ky**2
        self.kz2 = self.kz**2
        self.mask = (
            (np.abs(mx)[:, None, None] <= nx / 3)
            & (np.abs(my)[None, :, None] <= ny / 3)
            & (mz[None, None, :] <= nz / 3)
        )
        # 1 / (i k_z) with the k_z = 0 and Nyquist columns zeroed
        self.inv_ikz = np.zeros_like(self.ikz)
        nonzero = self.ikz != 0
        self.inv_ikz[nonzero] = 1.0 / self.ikz[nonzero]
        # 2-D tables on the k_z = 0 plane (full complex layout in x and y)
        self.kx2d = self.kx[:, :, 0]
        self.ky2d = self.ky[:, :, 0]
        self.ikx2d = self.ikx[:, :, 0]
        self.iky2d = self.iky[:, :, 0]
        self.kh2_2d = self.kh2[:, :, 0]
        self.inv_kh2_2d = np.zeros_like(self.kh2_2d)
        self.inv_kh2_2d[self.kh2_2d > 0] = 1.0 / self.kh2_2d[self.kh2_2d > 0]
        # same with Nyquist-free first-derivative wavenumbers: inverse of -(ik)^2
        kp2 = -(self.ikx2d**2 + self.iky2d**2).real
        self.inv_kp2_2d = np.zeros_like(kp2)
        self.inv_kp2_2d[kp2 > 0] = 1.0 / kp2[kp2 > 0]
        # Hermitian weights for Parseval sums over the half z axis
        w = np.full(nz // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        self.parseval_weight = w[None, None, :]

    def fwd(self, a: np.ndarray) -> np.ndarray:
        return sfft.rfftn(a)

    def inv(self, ah: np.ndarray) -> np.ndarray:
        return sfft.irfftn(ah, s=self.grid.shape)

    def antiderivative(self, fh: np.ndarray):
        """Physical and spectral ``F = int_{-h}^z f``; ``fh`` must have no k_z = 0 content."""
        Fh = fh * self.inv_ikz
        F = self.inv(Fh)
        bottom = F[:, :, 0].copy()
        F -= bottom[:, :, None]
        Fh[:, :, 0] = -self.grid.nz * sfft.fft2(bottom)
        return F, Fh

    def inner(self, ah: np.ndarray, bh: np.ndarray) -> float:
        """Integral over the box of the product of two real fields, from their spectra."""
        n = np.prod(self.grid.shape)
        s = np.sum(self.parseval_weight * (ah.real * bh.real + ah.imag * bh.imag))
        return float(s) * self.grid.volume / n**2

    def norm2_sq(self, ah: np.ndarray) -> float:
        return self.inner(ah, ah)


@lru_cache(maxsize=16)
def ops_for(grid: Grid) -> SpectralOps:
    return SpectralOps(grid)


def _check_grid(f: ScalarField):
    return ops_for(f.grid)


def derivative(f: ScalarField, axis: str) -> ScalarField:
    ops = _check_grid(f)
    ik = {"x": ops.ikx, "y": ops.iky, "z": ops.ikz}[axis]
    out = ops.inv(ik * ops.fwd(f.values))
    parity = f.parity.flip() if axis == "z" else f.parity
    return ScalarField(f.grid, parity, out)


def laplacian_h(f: ScalarField) -> ScalarField:
    ops = _check_grid(f)
    return f.with_values(ops.inv(-ops.kh2 * ops.fwd(f.values)))


def _invert_2d(values: np.ndarray) -> np.ndarray:
    nx, ny = values.shape[:2]
    kx = 2 * np.pi * _signed_modes(nx)[:, None]
    ky = 2 * np.pi * _signed_modes(ny)[None, :]
    kh2 = kx**2 + ky**2
    inv = np.zeros_like(kh2)
    inv[kh2 > 0] = 1.0 / kh2[kh2 > 0]
    if values.ndim == 3:
        inv = inv[:, :, None]
    fh = sfft.fft2(values, axes=(0, 1))
    return sfft.ifft2(fh * inv, axes=(0, 1)).real


def invert_laplacian_h(f):
    """Solve ``-Delta_H u = f`` level by level with zero horizontal mean.

    Accepts a ScalarField or a 2-D array over M.
    """
    values = f.values if isinstance(f, ScalarField) else np.asarray(f, dtype=float)
    mean = np.mean(values, axis=(0, 1))
    worst = float(np.max(np.abs(mean)))
    if worst > MEAN_TOL:
        raise NonZeroMeanError(f"horizontal mean {worst:.3e} exceeds {MEAN_TOL:g}")
    u = _invert_2d(values)
    return f.with_values(u) if isinstance(f, ScalarField) else u


def z_antiderivative(f: ScalarField) -> ScalarField:
    """``F(x, y, z) = int_{-h}^z f dxi``; requires zero vertical integral at every (x, y)."""
    ops = _check_grid(f)
    integral = f.values.sum(axis=2) * f.grid.dz
    worst = float(np.max(np.abs(integral)))
    if worst > MEAN_TOL:
        raise NonZeroVerticalMeanError(f"vertical integral {worst:.3e} exceeds {MEAN_TOL:g}")
    fh = ops.fwd(f.values)
    fh[:, :, 0] = 0.0
    F, _ = ops.antiderivative(fh)
    return ScalarField(f.grid, f.parity.flip(), F)


def vertical_average(f: ScalarField) -> np.ndarray:
    """(1/2h) int f dz as a 2-D array; exact for the trigonometric interpolant."""
    return f.values.mean(axis=2)


def dealias(f: ScalarField) -> ScalarField:
    ops = _check_grid(f)
    return f.with_values(ops.inv(ops.mask * ops.fwd(f.values)))


def horizontal_divergence_2d(a1: np.ndarray, a2: np.ndarray) -> np.ndarray:
    nx, ny = a1.shape
    ikx = 1j * 2 * np.pi * _signed_modes(nx)[:, None]
    iky = 1j * 2 * np.pi * _signed_modes(ny)[None, :]
    ikx[np.abs(_signed_modes(nx)) == nx // 2] = 0
    iky[:, np.abs(_signed_modes(ny)) == ny // 2] = 0
    return sfft.ifft2(ikx * sfft.fft2(a1) + iky * sfft.fft2(a2)).real


def upsample(values: np.ndarray, factor: int = 2) -> np.ndarray:
    """Spectral interpolation onto a grid ``factor`` times finer in every direction.

    Exact for fields with no Nyquist content; used where quadrature of
    quartic quantities must be exact.
    """
    nx, ny, nz = values.shape
    fh = sfft.fftn(values)
    big = np.zeros((factor * nx, factor * ny, factor * nz), dtype=complex)
    sx = _split(nx)
    sy = _split(ny)
    sz = _split(nz)
    for ix_src, ix_dst in zip(*sx(factor * nx)):
        for iy_src, iy_dst in zip(*sy(factor * ny)):
            for iz_src, iz_dst in zip(*sz(factor * nz)):
                big[ix_dst, iy_dst, iz_dst] = fh[ix_src, iy_src, iz_src]
    return sfft.ifftn(big).real * factor**3


def _split(n):
    """Index slices mapping nonnegative and negative modes (Nyquist dropped) to a larger grid."""

    def mapping(big_n):
        pos_src, pos_dst = slice(0, n // 2), slice(0, n // 2)
        neg_src, neg_dst = slice(n // 2 + 1, n), slice(big_n - n // 2 + 1, big_n)
        return (pos_src, neg_src), (pos_dst, neg_dst)

    return mapping


__all__ = [
    "SpectralOps",
    "ops_for",
    "derivative",
    "laplacian_h",
    "invert_laplacian_h",
    "z_antiderivative",
    "vertical_average",
    "dealias",
    "upsample",
    "bandlimited",
]


def bandlimited(grid: Grid, rng: np.random.Generator, parity: Parity, kmax: int = 6,
                kzmax: int | None = None, decay: float = 2.0) -> np.ndarray:
    """Random trigonometric polynomial with Gaussian coefficients decaying like |k|^-decay.

    Horizontal modes ``|m| <= kmax`` and vertical modes ``1..kzmax`` (plus the
    z-independent mode for even parity) in ``cos`` (even) or ``sin`` (odd) of
    ``pi m z / h``. The coefficients depend only on the generator state, not on
    the grid, so the same draw can be sampled at several resolutions.
    """
    kzmax = kmax if kzmax is None else kzmax
    if parity is Parity.NONE:
        raise ValueError("parity must be EVEN or ODD")
    mh = np.arange(-kmax, kmax + 1)
    mz = np.arange(0, kzmax + 1)
    shape = (mh.size, mh.size, mz.size)
    coef = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    k2 = (2 * np.pi) ** 2 * (mh[:, None, None] ** 2 + mh[None, :, None] ** 2) + (
        np.pi / grid.h * mz[None, None, :]
    ) ** 2
    amp = np.zeros(shape)
    amp[k2 > 0] = k2[k2 > 0] ** (-decay / 2)
    if parity is Parity.ODD:
        amp[:, :, 0] = 0.0
    coef *= amp
    ex = np.exp(2j * np.pi * np.outer(mh, grid.x))
    ey = np.exp(2j * np.pi * np.outer(mh, grid.y))
    phase = np.pi / grid.h * np.outer(mz, grid.z)
    ez = np.cos(phase) if parity is Parity.EVEN else np.sin(phase)
    out = np.einsum("abc,ai,bj,ck->ijk", coef, ex, ey, ez, optimize=True).real
    if parity is Parity.ODD:
        out[:, :, 0] = 0.0
        out[:, :, grid.nz // 2] = 0.0
    return out
