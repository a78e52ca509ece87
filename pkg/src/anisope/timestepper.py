"""IMEX time integration.

The linear dissipation ``Delta_H + eps d_z^2`` is diagonal in Fourier space and
is treated with Crank-Nicolson, solved exactly mode by mode. Everything else
(transport, Coriolis, pressure, the ``-w/h`` source) is explicit:
second-order Adams-Bashforth with variable-step weights, self-started by a Heun
predictor-corrector step. The barotropic projection is applied after every
stage.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .domain import Params, Parity, ScalarField, State
from .errors import GridMismatch, NonFinite, StepTooSmall
from .pe_core import explicit_terms, linear_symbol, project_hat
from .spectral import ops_for

log = logging.getLogger(__name__)

SCHEMES = ("cnab2", "euler")
SPEED_FLOOR = 1e-12


@dataclass(frozen=True)
class StepControls:
    scheme: str = "cnab2"
    cfl: float = 0.5
    dt_max: float = 1e-3
    dt_min: float = 1e-9

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if not 0 < self.dt_min < self.dt_max:
            raise ValueError("need 0 < dt_min < dt_max")


def _cfl_from_speeds(grid, speeds, controls: StepControls) -> float:
    limits = [
        d / s for d, s in zip((grid.dx, grid.dy, grid.dz), speeds) if s > SPEED_FLOOR
    ]
    dt = min([controls.dt_max] + [controls.cfl * lim for lim in limits])
    return dt


def cfl_dt(state: State, controls: StepControls) -> float:
    """Advective step limit from the collocation maxima of |v1|, |v2| and |w|."""
    from .pe_core import diagnose_w

    w = diagnose_w(state.v).values
    speeds = [float(np.max(np.abs(a))) for a in (state.v1.values, state.v2.values, w)]
    dt = _cfl_from_speeds(state.grid, speeds, controls)
    if dt < controls.dt_min:
        raise StepTooSmall(f"CFL step {dt:.3e} below dt_min", t=state.t, state=state)
    return dt


class SpectralState:
    """Dealiased spectra of (v1, v2, T) at time t."""

    __slots__ = ("v1h", "v2h", "Th", "t")

    def __init__(self, v1h, v2h, Th, t):
        self.v1h, self.v2h, self.Th, self.t = v1h, v2h, Th, t

    @classmethod
    def from_state(cls, state: State) -> "SpectralState":
        ops = ops_for(state.grid)
        v1, v2, T = state.arrays
        v1h, v2h = project_hat(ops, ops.mask * ops.fwd(v1), ops.mask * ops.fwd(v2))
        return cls(v1h, v2h, ops.mask * ops.fwd(T), state.t)

    def to_state(self, grid) -> State:
        ops = ops_for(grid)
        return State(
            (
                ScalarField(grid, Parity.EVEN, ops.inv(self.v1h)),
                ScalarField(grid, Parity.EVEN, ops.inv(self.v2h)),
            ),
            ScalarField(grid, Parity.ODD, ops.inv(self.Th)),
            self.t,
        )


class IMEXStepper:
    """Holds the Adams-Bashforth history between consecutive steps."""

    def __init__(self, grid, params: Params, controls: StepControls):
        if abs(grid.h - params.h) > 1e-14 * grid.h:
            raise GridMismatch(f"grid h={grid.h} differs from params h={params.h}")
        self.grid = grid
        self.params = params
        self.controls = controls
        self.ops = ops_for(grid)
        self.L = linear_symbol(self.ops, params.eps)
        self._history = None  # (n1, n2, nT, dt)

    def reset(self):
        self._history = None

    def explicit(self, s: SpectralState):
        # overflow in a blowing-up state is reported by the finiteness check in advance()
        with np.errstate(over="ignore", invalid="ignore"):
            return explicit_terms(self.ops, s.v1h, s.v2h, s.Th, self.params.f0)

    def max_speeds(self, s: SpectralState, ex) -> list:
        ops = self.ops
        return [
            float(np.max(np.abs(ops.inv(s.v1h)))),
            float(np.max(np.abs(ops.inv(s.v2h)))),
            float(np.max(np.abs(ex.w))),
        ]

    def choose_dt(self, s: SpectralState, ex) -> float:
        dt = _cfl_from_speeds(self.grid, self.max_speeds(s, ex), self.controls)
        if dt < self.controls.dt_min:
            raise StepTooSmall(f"CFL step {dt:.3e} below dt_min at t={s.t:.6g}", t=s.t)
        return dt

    def _cn(self, s: SpectralState, n, dt):
        half = 0.5 * dt * self.L
        num, den = 1.0 + half, 1.0 - half
        v1h = (num * s.v1h + dt * n[0]) / den
        v2h = (num * s.v2h + dt * n[1]) / den
        Th = (num * s.Th + dt * n[2]) / den
        v1h, v2h = project_hat(self.ops, v1h, v2h)
        return SpectralState(v1h, v2h, Th, s.t + dt)

    def advance(self, s: SpectralState, dt: float, ex=None) -> SpectralState:
        if not dt > 0:
            raise ValueError("dt must be positive")
        with np.errstate(over="ignore", invalid="ignore"):
            return self._advance(s, dt, ex)

    def _advance(self, s: SpectralState, dt: float, ex=None) -> SpectralState:
        if ex is None:
            ex = self.explicit(s)
        n_now = (ex.n1, ex.n2, ex.nT)
        if self.controls.scheme == "euler":
            den = 1.0 - dt * self.L
            v1h, v2h = project_hat(
                self.ops, (s.v1h + dt * ex.n1) / den, (s.v2h + dt * ex.n2) / den
            )
            out = SpectralState(v1h, v2h, (s.Th + dt * ex.nT) / den, s.t + dt)
        elif self._history is None:
            pred = self._cn(s, n_now, dt)
            ex_p = self.explicit(pred)
            n_avg = tuple(0.5 * (a + b) for a, b in zip(n_now, (ex_p.n1, ex_p.n2, ex_p.nT)))
            out = self._cn(s, n_avg, dt)
        else:
            *n_old, dt_old = self._history
            r = dt / dt_old
            n_ab = tuple((1 + 0.5 * r) * a - 0.5 * r * b for a, b in zip(n_now, n_old))
            out = self._cn(s, n_ab, dt)
        for a in (out.v1h, out.v2h, out.Th):
            if not np.all(np.isfinite(a)):
                raise NonFinite(f"non-finite values after step to t={out.t:.6g}", t=s.t)
        self._history = (*n_now, dt)
        return out


def step(state: State, dt: float, controls: StepControls, params: Params) -> State:
    """One self-starting IMEX step (Heun-CN for cnab2, backward Euler for euler)."""
    stepper = IMEXStepper(state.grid, params, controls)
    try:
        out = stepper.advance(SpectralState.from_state(state), dt)
    except NonFinite as err:
        err.state = state
        raise
    return out.to_state(state.grid)


@dataclass
class StepInfo:
    index: int
    dt: float
    prev: State
    state: State


def run(
    initial_state: State,
    params: Params,
    controls: StepControls,
    hooks=(),
    cadence: int = 1,
    t_end: float | None = None,
    fixed_dt: float | None = None,
    record=True,
    diagnostics_options=None,
):
    """Advance to ``t_end`` (default ``params.t_end``), returning (final_state, records).

    ``hooks`` are called after every step with a :class:`StepInfo`. Diagnostics
    records are taken at t0, every ``cadence`` steps, and at the final time.
    With ``fixed_dt`` the CFL rule is bypassed (the last step is still clipped
    to land on ``t_end``).
    """
    from .diagnostics import record as make_record

    t_end = params.t_end if t_end is None else t_end
    if t_end < initial_state.t:
        raise ValueError("t_end precedes the initial time")
    opts = diagnostics_options or {}
    grid = initial_state.grid
    stepper = IMEXStepper(grid, params, controls)
    s = SpectralState.from_state(initial_state)
    current = s.to_state(grid)
    records = [make_record(current, initial_state, params, **opts)] if record else []
    if t_end == initial_state.t:
        return current, records

    tiny = 1e-12 * max(1.0, abs(t_end))
    index = 0
    while t_end - s.t > tiny:
        try:
            ex = stepper.explicit(s)
            dt = fixed_dt if fixed_dt is not None else stepper.choose_dt(s, ex)
            if dt >= t_end - s.t - tiny:
                dt = t_end - s.t
            new = stepper.advance(s, dt, ex)
        except (NonFinite, StepTooSmall) as err:
            err.t = s.t
            err.state = s.to_state(grid)
            log.error("run aborted at t=%.6g: %s", s.t, err)
            raise
        index += 1
        final = t_end - new.t <= tiny
        if final:
            new.t = t_end
        want_record = record and (index % cadence == 0 or final)
        if hooks or want_record:
            prev = current if current.t == s.t else s.to_state(grid)
            current = new.to_state(grid)
            info = StepInfo(index, dt, prev, current)
            for hook in hooks:
                hook(info)
            if want_record:
                records.append(
                    make_record(current, initial_state, params, prev=prev, dt=dt, step=index, **opts)
                )
        s = new
    if current.t != s.t:
        current = s.to_state(grid)
    return current, records
