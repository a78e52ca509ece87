"""Initial-condition presets. Every preset returns an admissible (projected) state."""

from __future__ import annotations

import numpy as np

from .domain import Grid, Parity, ScalarField, State, make_state
from .spectral import bandlimited


def heat_mode(grid: Grid, amplitude: float = 1.0) -> State:
    """``v = (A sin 2 pi y, 0)``, ``T = 0``: decays as ``exp(-4 pi^2 t)`` when f0 = 0."""
    v1 = ScalarField.from_function(
        grid, lambda X, Y, Z: amplitude * np.sin(2 * np.pi * Y) + 0 * X + 0 * Z, Parity.EVEN
    )
    return make_state(v1, ScalarField.zeros(grid, Parity.EVEN), ScalarField.zeros(grid, Parity.ODD))


def taylor_green_like(grid: Grid, amplitude: float = 1.0) -> State:
    """Horizontally solenoidal Taylor-Green cells with a first baroclinic profile."""
    h = grid.h

    def prof(Z):
        return np.cos(np.pi * Z / h)

    v1 = ScalarField.from_function(
        grid, lambda X, Y, Z: amplitude * np.sin(2 * np.pi * X) * np.cos(2 * np.pi * Y) * prof(Z),
        Parity.EVEN,
    )
    v2 = ScalarField.from_function(
        grid, lambda X, Y, Z: -amplitude * np.cos(2 * np.pi * X) * np.sin(2 * np.pi * Y) * prof(Z),
        Parity.EVEN,
    )
    T = ScalarField.from_function(
        grid, lambda X, Y, Z: 0.5 * amplitude * np.cos(2 * np.pi * X) * np.sin(np.pi * Z / h),
        Parity.ODD,
    )
    return make_state(v1, v2, T)


def random_bandlimited(grid: Grid, seed: int = 0, decay: float = 2.0, kmax: int = 4,
                       amplitude: float = 1.0) -> State:
    """Random smooth data; each field is scaled to maximum ``amplitude`` before projection."""
    rng = np.random.default_rng(seed)

    def draw(parity):
        a = bandlimited(grid, rng, parity, kmax, kmax, decay)
        top = np.max(np.abs(a))
        return ScalarField(grid, parity, a * (amplitude / top if top > 0 else 0.0))

    v1, v2, T = draw(Parity.EVEN), draw(Parity.EVEN), draw(Parity.ODD)
    return make_state(v1, v2, T)


def build_initial(config) -> State:
    """Initial state named by a RunConfig."""
    from .persistence import read_snapshot

    grid = config.grid()
    if config.initial == "heat_mode":
        return heat_mode(grid, config.amplitude)
    if config.initial == "taylor_green_like":
        return taylor_green_like(grid, config.amplitude)
    if config.initial == "random_bandlimited":
        return random_bandlimited(grid, config.seed, config.decay, config.kmax, config.amplitude)
    state = read_snapshot(config.snapshot)
    if state.grid != grid:
        from .errors import GridMismatch

        raise GridMismatch(f"snapshot grid {state.grid} differs from configured {grid}")
    return state
