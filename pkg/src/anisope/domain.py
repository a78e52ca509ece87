"""Grids, parity-tagged fields, and the even/odd extension between the
half-depth box ``M x (-h, 0)`` and the periodic box ``M x (-h, h)``.

Collocation is uniform and node based::

    x_i = i / nx,  y_j = j / ny,  z_k = -h + 2 h k / nz

so that ``z = -h`` (k = 0) and ``z = 0`` (k = nz/2) are grid points. Reflection
``z -> -z`` maps index ``k`` to ``(-k) mod nz``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import GridMismatch, OddExtensionMismatch, ParityError

ODD_EXTENSION_TOL = 1e-10
PARITY_TOL = 1e-10


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"
    NONE = "none"

    @property
    def sign(self):
        return {Parity.EVEN: 1.0, Parity.ODD: -1.0}.get(self)

    def flip(self) -> "Parity":
        """Parity after one z-derivative or z-antiderivative."""
        return {Parity.EVEN: Parity.ODD, Parity.ODD: Parity.EVEN}.get(self, Parity.NONE)

    def __mul__(self, other: "Parity") -> "Parity":
        if Parity.NONE in (self, other):
            return Parity.NONE
        return Parity.EVEN if self is other else Parity.ODD


@dataclass(frozen=True)
class Grid:
    nx: int
    ny: int
    nz: int
    h: float = 1.0

    def __post_init__(self):
        for name in ("nx", "ny", "nz"):
            n = getattr(self, name)
            if int(n) != n or n < 4 or n % 2:
                raise ValueError(f"{name} must be an even integer >= 4, got {n}")
        if not self.h > 0:
            raise ValueError(f"h must be positive, got {self.h}")

    Lx = 1.0
    Ly = 1.0

    @property
    def Lz(self) -> float:
        return 2.0 * self.h

    @property
    def shape(self):
        return (self.nx, self.ny, self.nz)

    @property
    def dx(self) -> float:
        return self.Lx / self.nx

    @property
    def dy(self) -> float:
        return self.Ly / self.ny

    @property
    def dz(self) -> float:
        return self.Lz / self.nz

    @property
    def volume(self) -> float:
        return self.Lx * self.Ly * self.Lz

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.nx) / self.nx

    @property
    def y(self) -> np.ndarray:
        return np.arange(self.ny) / self.ny

    @property
    def z(self) -> np.ndarray:
        return -self.h + 2.0 * self.h * np.arange(self.nz) / self.nz

    def mesh(self):
        """Broadcastable coordinate arrays of shapes (nx,1,1), (1,ny,1), (1,1,nz)."""
        return (
            self.x[:, None, None],
            self.y[None, :, None],
            self.z[None, None, :],
        )

    @property
    def half_nz(self) -> int:
        """Number of z-levels of the half box, z in [-h, 0]."""
        return self.nz // 2 + 1

    def reflect_index(self) -> np.ndarray:
        return (-np.arange(self.nz)) % self.nz


def reflect(values: np.ndarray) -> np.ndarray:
    """Values of ``f(x, y, -z)`` on the collocation grid."""
    nz = values.shape[-1]
    return values[..., (-np.arange(nz)) % nz]


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Collocation values of a periodic scalar on the symmetric box.

    ``values`` is stored read-only. A declared parity is checked on
    construction to ``PARITY_TOL`` relative to the field magnitude.
    """

    grid: Grid
    parity: Parity
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.shape != self.grid.shape:
            raise GridMismatch(f"values have shape {values.shape}, grid is {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        if self.parity is not Parity.NONE:
            drift = parity_defect(values, self.parity)
            scale = max(1.0, float(np.max(np.abs(values), initial=0.0)))
            if drift > PARITY_TOL * scale:
                raise ParityError(f"field declared {self.parity.value} has parity defect {drift:.3e}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, grid: Grid, parity: Parity = Parity.NONE) -> "ScalarField":
        return cls(grid, parity, np.zeros(grid.shape))

    @classmethod
    def from_function(cls, grid: Grid, fn, parity: Parity = Parity.NONE) -> "ScalarField":
        X, Y, Z = grid.mesh()
        return cls(grid, parity, np.broadcast_to(fn(X, Y, Z), grid.shape))

    def with_values(self, values, parity: Parity | None = None) -> "ScalarField":
        return ScalarField(self.grid, self.parity if parity is None else parity, values)


def parity_defect(values: np.ndarray, parity: Parity) -> float:
    """max |f - s f(-z)| with s the parity sign; 0 for Parity.NONE."""
    if parity is Parity.NONE:
        return 0.0
    return float(np.max(np.abs(values - parity.sign * reflect(values)), initial=0.0))


@dataclass(frozen=True)
class Params:
    """Physical and numerical constants; viscosity and diffusivity are 1."""

    h: float = 1.0
    f0: float = 1.0
    eps: float = 1e-3
    cfl: float = 0.5
    dt_max: float = 1e-3
    t_end: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")
        if not self.eps >= 0:
            raise ValueError("eps must be nonnegative")
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if not self.dt_max > 0:
            raise ValueError("dt_max must be positive")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")


@dataclass(frozen=True, eq=False)
class State:
    v: tuple  # (ScalarField, ScalarField), both even
    T: ScalarField  # odd
    t: float = 0.0

    @property
    def grid(self) -> Grid:
        return self.T.grid

    @property
    def v1(self) -> ScalarField:
        return self.v[0]

    @property
    def v2(self) -> ScalarField:
        return self.v[1]

    @cached_property
    def arrays(self):
        return self.v[0].values, self.v[1].values, self.T.values

    @classmethod
    def zeros(cls, grid: Grid, t: float = 0.0) -> "State":
        return cls(
            (ScalarField.zeros(grid, Parity.EVEN), ScalarField.zeros(grid, Parity.EVEN)),
            ScalarField.zeros(grid, Parity.ODD),
            t,
        )


def extend(half: np.ndarray, parity: Parity, grid: Grid) -> ScalarField:
    """Even or odd extension in z of data given on z_k, k = 0..nz/2 (z in [-h, 0]).

    For an odd extension the input must vanish on the planes z = -h and z = 0
    to within ``ODD_EXTENSION_TOL``; those planes are set to exactly zero.
    """
    half = np.asarray(half, dtype=np.float64)
    nz = grid.nz
    expected = (grid.nx, grid.ny, grid.half_nz)
    if half.shape != expected:
        raise GridMismatch(f"half-domain data has shape {half.shape}, expected {expected}")
    if parity is Parity.NONE:
        raise ParityError("extension requires parity EVEN or ODD")
    out = np.empty(grid.shape)
    out[..., : grid.half_nz] = half
    if parity is Parity.ODD:
        bottom = float(np.max(np.abs(half[..., 0])))
        middle = float(np.max(np.abs(half[..., nz // 2])))
        if max(bottom, middle) > ODD_EXTENSION_TOL:
            raise OddExtensionMismatch(
                f"odd extension needs zero data at z=-h and z=0 (got {bottom:.3e}, {middle:.3e})"
            )
        out[..., 0] = 0.0
        out[..., nz // 2] = 0.0
    k = np.arange(grid.half_nz, nz)
    out[..., k] = parity.sign * out[..., nz - k]
    return ScalarField(grid, parity, out)


def restrict(f: ScalarField) -> np.ndarray:
    """Collocation values on z in [-h, 0], shape (nx, ny, nz/2 + 1)."""
    return np.array(f.values[..., : f.grid.half_nz])


def make_state(v1: ScalarField, v2: ScalarField, T: ScalarField, t: float = 0.0) -> State:
    """Validate parities and grids, then apply the barotropic projection to v."""
    from .pe_core import barotropic_project

    if not (v1.grid == v2.grid == T.grid):
        raise GridMismatch("v1, v2 and T must share one grid")
    if (v1.parity, v2.parity, T.parity) != (Parity.EVEN, Parity.EVEN, Parity.ODD):
        raise ParityError(
            f"expected parities (even, even, odd), got "
            f"({v1.parity.value}, {v2.parity.value}, {T.parity.value})"
        )
    if t < 0:
        raise ValueError("t must be nonnegative")
    return State(barotropic_project((v1, v2)), T, float(t))
