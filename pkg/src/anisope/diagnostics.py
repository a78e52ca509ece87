"""Norms, budgets and monitors evaluated on states.

All integrals are collocation sums over the periodic box, which equal the
integrals of the trigonometric interpolant for quadratic quantities of
band-limited fields. Quartic quantities are evaluated on a grid refined by two
in every direction so that they are exact as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .domain import Parity, ScalarField, State, parity_defect
from .spectral import horizontal_divergence_2d, ops_for, upsample

Q_SET = (2, 4, 8, 16, 32, math.inf)
GROWTH_CEILING = 50.0
MONITOR_METHODS = ("quadrature", "parseval")


def _qlabel(q) -> str:
    return "inf" if math.isinf(q) else str(int(q)) if float(q).is_integer() else str(q)


def _magnitude(f) -> tuple:
    """(|f| array, grid) for a ScalarField, a tuple of them, or a raw array with a grid."""
    if isinstance(f, ScalarField):
        return np.abs(f.values), f.grid
    parts = list(f)
    grid = parts[0].grid
    return np.sqrt(sum(p.values**2 for p in parts)), grid


def lq_norm(f, q) -> float:
    """L^q norm over the box by collocation quadrature; q = inf gives the collocation max.

    ``f`` is a ScalarField or a tuple of them (pointwise Euclidean magnitude).
    The integrand is scaled by its maximum before raising to the power q.
    """
    if not q >= 1:
        raise ValueError("q must be >= 1")
    mag, grid = _magnitude(f)
    return _lq_array(mag, q, grid.volume / mag.size)


def _lq_array(mag, q, cell) -> float:
    top = float(np.max(mag, initial=0.0))
    if math.isinf(q) or top == 0.0:
        return top
    return top * float(cell * np.sum((mag / top) ** q)) ** (1.0 / q)


def t_star(T: ScalarField, h: float | None = None) -> ScalarField:
    """Shifted temperature ``T + z/h`` on the collocation nodes."""
    h = T.grid.h if h is None else h
    _, _, Z = T.grid.mesh()
    return ScalarField(T.grid, Parity.NONE, T.values + Z / h)


def energy(state: State) -> float:
    """``0.5 ||(v, T)||_2^2``."""
    cell = state.grid.volume / np.prod(state.grid.shape)
    v1, v2, T = state.arrays
    return 0.5 * cell * float(np.sum(v1 * v1) + np.sum(v2 * v2) + np.sum(T * T))


# ---------------------------------------------------------------------------
# energy identity


def _work_and_dissipation(ops, v1h, v2h, Th, eps):
    """Dissipation and non-dissipative work rate of a (mid-point) state, by Parseval."""
    h = ops.grid.h
    diss = 0.0
    for fh in (v1h, v2h, Th):
        diss += ops.inner(fh, ops.kh2 * fh) + eps * ops.inner(fh, ops.kz2 * fh)
    div = ops.ikx * v1h + ops.iky * v2h
    div[:, :, 0] = 0.0
    _, Idiv = ops.antiderivative(div)
    T0 = Th.copy()
    T0[:, :, 0] = 0.0
    _, IT = ops.antiderivative(T0)
    work = ops.inner(IT, div) - ops.inner(Idiv, Th) / h
    return diss, work


def energy_budget_residual(prev: State, next: State, dt: float, params) -> float:
    """Discrete residual of the energy identity between two consecutive states.

    ``dE/dt + ||grad_H v||^2 + eps ||d_z v||^2 + ||grad_H T||^2 + eps ||d_z T||^2
    + int [(int_{-h}^z T) div_H v - (1/h)(int_{-h}^z div_H v) T]``, with the
    time derivative a difference quotient and the spatial terms evaluated at the
    average of the two states. Should vanish at second order in dt.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    ops = ops_for(prev.grid)
    a, b = prev.arrays, next.arrays
    mid = [ops.fwd(0.5 * (x + y)) for x, y in zip(a, b)]
    diss, work = _work_and_dissipation(ops, *mid, params.eps)
    return (energy(next) - energy(prev)) / dt + diss + work


# ---------------------------------------------------------------------------
# structural monitors


def constraint_residual(state: State) -> float:
    """``|| div_H int_{-h}^h v dz ||_{L^2(M)}``."""
    g = state.grid
    V1 = state.v1.values.sum(axis=2) * g.dz
    V2 = state.v2.values.sum(axis=2) * g.dz
    div = horizontal_divergence_2d(V1, V2)
    return math.sqrt(g.dx * g.dy * float(np.sum(div * div)))


def parity_drift(state: State) -> float:
    """Largest ``max|f - s f(-z)|`` over v1, v2 (s = +1) and T (s = -1).

    The expected parity comes from the role of the field in the state, not
    from its tag, so corrupted untagged fields are measured too.
    """
    v1, v2, T = state.arrays
    return max(
        parity_defect(v1, Parity.EVEN),
        parity_defect(v2, Parity.EVEN),
        parity_defect(T, Parity.ODD),
    )


def lq_growth_ratio(state: State, initial_state: State, q_set=Q_SET) -> float:
    """``max_q ||v(t)||_q / ((1 + ||v_0||_q) sqrt q)`` over the finite exponents."""
    best = 0.0
    for q in q_set:
        if math.isinf(q):
            continue
        num = lq_norm(state.v, q)
        den = (1.0 + lq_norm(initial_state.v, q)) * math.sqrt(q)
        best = max(best, num / den)
    return best


# ---------------------------------------------------------------------------
# the a_i / b_i monitor


def _strip_nyquist(ops, fh):
    g = ops.grid
    out = fh.copy()
    out[g.nx // 2, :, :] = 0.0
    out[:, g.ny // 2, :] = 0.0
    out[:, :, g.nz // 2] = 0.0
    return out


class _Parseval:
    """Squared norms of ``grad_H^p d_z^n`` applied to fields, from their spectra.

    ``p`` counts horizontal half-Laplacians: 1 is grad_H, 2 is Delta_H, 3 is
    grad_H Delta_H.
    """

    def __init__(self, ops, spectra):
        self.ops = ops
        self.spectra = spectra

    def sq(self, names, p, n):
        ops = self.ops
        w = ops.kh2**p * ops.kz2**n
        return sum(ops.inner(self.spectra[k], w * self.spectra[k]) for k in names)


class _Quadrature:
    """The same squared norms from explicit derivative fields on the grid."""

    def __init__(self, ops, spectra):
        self.ops = ops
        self.spectra = spectra
        self.cell = ops.grid.volume / np.prod(ops.grid.shape)

    def _components(self, fh, p, n):
        ops = self.ops
        base = fh * ops.ikz**n
        lap, grad = divmod(p, 2)
        base = base * (-ops.kh2) ** lap
        if grad:
            return [ops.inv(ops.ikx * base), ops.inv(ops.iky * base)]
        return [ops.inv(base)]

    def sq(self, names, p, n):
        total = 0.0
        for k in names:
            for c in self._components(self.spectra[k], p, n):
                total += float(np.sum(c * c))
        return self.cell * total


def _quartic_terms(ops, u1h, u2h, method):
    """``||u||_4^4`` and ``|| |u| grad_H u ||_2^2`` computed exactly on a doubled grid."""
    g = ops.grid
    fine = [upsample(ops.inv(a)) for a in (u1h, u2h)]
    grads = [upsample(ops.inv(ik * a)) for a in (u1h, u2h) for ik in (ops.ikx, ops.iky)]
    mag2 = fine[0] ** 2 + fine[1] ** 2
    grad2 = sum(d * d for d in grads)
    cell = g.volume / mag2.size
    if method == "quadrature":
        return cell * float(np.sum(mag2 * mag2)), cell * float(np.sum(mag2 * grad2))
    # Parseval on the fine grid: both quadratic factors are resolved there
    n = mag2.size
    mh, gh = sfft.fftn(mag2), sfft.fftn(grad2)
    scale = g.volume / n**2
    return (
        scale * float(np.sum(np.abs(mh) ** 2)),
        scale * float(np.sum((mh * np.conj(gh)).real)),
    )


def apriori_monitor(state: State, params, method: str = "quadrature"):
    """The nine pairs ``(a_i, b_i)`` of the H^2 a priori estimate, with ``u = d_z v``.

    ``method`` selects collocation quadrature of derivative fields or Parseval
    sums of spectra; for band-limited data without Nyquist content the two agree
    to round-off. Nyquist modes are discarded before either evaluation.
    """
    if method not in MONITOR_METHODS:
        raise ValueError(f"method must be one of {MONITOR_METHODS}")
    ops = ops_for(state.grid)
    eps = params.eps
    v1h, v2h, Th = (_strip_nyquist(ops, ops.fwd(a)) for a in state.arrays)
    u1h, u2h = ops.ikz * v1h, ops.ikz * v2h
    spectra = {"v1": v1h, "v2": v2h, "T": Th, "u1": u1h, "u2": u2h}
    N = (_Parseval if method == "parseval" else _Quadrature)(ops, spectra)
    v, u, T = ("v1", "v2"), ("u1", "u2"), ("T",)
    u4, u_grad = _quartic_terms(ops, u1h, u2h, method)

    a = np.array([
        N.sq(u, 0, 0) + u4,
        N.sq(T, 0, 1),
        N.sq(v, 1, 0),
        N.sq(T, 1, 0),
        N.sq(u, 0, 1),
        N.sq(T, 0, 2),
        N.sq(u, 1, 0),
        N.sq(T, 1, 1),
        N.sq(v, 2, 0) + N.sq(T, 2, 0),
    ])
    b = np.array([
        N.sq(u, 1, 0) + eps * N.sq(u, 0, 1) + u_grad,
        N.sq(T, 1, 1) + eps * N.sq(T, 0, 2),
        N.sq(v, 2, 0) + eps * N.sq(v, 1, 1),
        N.sq(T, 2, 0) + eps * N.sq(T, 1, 1),
        N.sq(u, 1, 1) + eps * N.sq(u, 0, 2),
        N.sq(T, 1, 2) + eps * N.sq(T, 0, 3),
        N.sq(u, 2, 0) + eps * N.sq(u, 1, 1),
        N.sq(T, 2, 1) + eps * N.sq(T, 1, 2),
        N.sq(v, 3, 0) + N.sq(T, 3, 0) + eps * (N.sq(v, 2, 1) + N.sq(T, 2, 1)),
    ])
    return a, b


def _rhs_factors(a, b, vinf2, grad_v2, grad_T2):
    """Constant-free right sides of the nine differential inequalities for a_i."""
    a1, a2, a3, a4, a5, a6, a7, a8, a9 = a
    b1, b2, b3, b4, b5, b6, b7, b8, b9 = b
    one = 1.0 + vinf2
    return np.array([
        one * a1,
        one * a2 + grad_v2 + a1 + b1,
        vinf2 * a3 + grad_T2 + a1**2,
        (1 + a2 + a3) ** 2 * (1 + b2 + b3),
        one * a5 + b1 + b2,
        one * a6 + (1 + a2 + a5) ** 2 * (1 + b1 + b2 + b5),
        vinf2 * a7 + (a1 + a3 + a4 + a5) * (b1 + b3 + b5),
        vinf2 * a8 + (1 + a3 + a4 + a5 + a6) ** 2 * (1 + b3 + b4 + b5 + b6),
        one * a9 + (1 + a1 + a3 + a4 + a6 + a7 + a8) * (1 + b3 + b4 + b7 + b8),
    ])


def apriori_ratio_series(records) -> np.ndarray:
    """Empirical constants ``(da_i/dt + b_i) / rhs_i`` between consecutive records.

    The time derivative is a forward difference and b_i is averaged over the
    interval. Returns an array of shape (len(records) - 1, 9); entries whose
    right side vanishes are 0.
    """
    rows = []
    for r0, r1 in zip(records[:-1], records[1:]):
        dt = r1.t - r0.t
        if dt <= 0:
            continue
        a0, a1 = np.asarray(r0.a_vec), np.asarray(r1.a_vec)
        bm = 0.5 * (np.asarray(r0.b_vec) + np.asarray(r1.b_vec))
        am = 0.5 * (a0 + a1)
        vinf2 = 0.5 * (r0.v_lq["inf"] ** 2 + r1.v_lq["inf"] ** 2)
        rhs = _rhs_factors(am, bm, vinf2, am[2], am[3])
        lhs = (a1 - a0) / dt + bm
        rows.append(np.divide(lhs, rhs, out=np.zeros(9), where=rhs > 0))
    return np.array(rows).reshape(-1, 9)


# ---------------------------------------------------------------------------
# records


def partial_norms(state: State) -> dict:
    """H^1/H^2 partial norms of v and T (not squared)."""
    ops = ops_for(state.grid)
    spectra = {k: ops.fwd(a) for k, a in zip(("v1", "v2", "T"), state.arrays)}
    N = _Parseval(ops, spectra)
    out = {}
    for label, names in (("v", ("v1", "v2")), ("T", ("T",))):
        for key, (p, n) in {
            "grad_h": (1, 0),
            "dz": (0, 1),
            "lap_h": (2, 0),
            "grad_h_dz": (1, 1),
            "dzz": (0, 2),
        }.items():
            out[f"{label}_{key}"] = math.sqrt(max(N.sq(names, p, n), 0.0))
    return out


@dataclass
class DiagnosticsRecord:
    t: float
    step: int = 0
    dt: float = 0.0
    energy: float = 0.0
    v_lq: dict = field(default_factory=dict)
    tstar_lq: dict = field(default_factory=dict)
    sup: dict = field(default_factory=dict)
    partial: dict = field(default_factory=dict)
    energy_residual: float = 0.0
    constraint_residual: float = 0.0
    parity_drift: float = 0.0
    lq_growth_ratio: float = 0.0
    a_vec: tuple = ()
    b_vec: tuple = ()

    @classmethod
    def empty(cls, t: float = 0.0) -> "DiagnosticsRecord":
        """A zero record with every column present (fixes the CSV header)."""
        labels = [_qlabel(q) for q in Q_SET]
        partial = {f"{f}_{k}": 0.0 for f in ("v", "T")
                   for k in ("grad_h", "dz", "lap_h", "grad_h_dz", "dzz")}
        return cls(
            t=t,
            v_lq=dict.fromkeys(labels, 0.0),
            tstar_lq=dict.fromkeys(labels, 0.0),
            sup=dict.fromkeys(("v", "T", "Tstar"), 0.0),
            partial=partial,
            a_vec=(0.0,) * 9,
            b_vec=(0.0,) * 9,
        )

    def to_row(self) -> dict:
        """Flat mapping with stable column order."""
        row = {"t": self.t, "step": self.step, "dt": self.dt, "energy": self.energy}
        row.update({f"v_L{k}": x for k, x in self.v_lq.items()})
        row.update({f"Tstar_L{k}": x for k, x in self.tstar_lq.items()})
        row.update({f"sup_{k}": x for k, x in self.sup.items()})
        row.update(self.partial)
        row["energy_residual"] = self.energy_residual
        row["constraint_residual"] = self.constraint_residual
        row["parity_drift"] = self.parity_drift
        row["lq_growth_ratio"] = self.lq_growth_ratio
        row.update({f"a{i + 1}": x for i, x in enumerate(self.a_vec)})
        row.update({f"b{i + 1}": x for i, x in enumerate(self.b_vec)})
        return row


def record(
    state: State,
    initial_state: State,
    params,
    prev: State | None = None,
    dt: float | None = None,
    step: int = 0,
    monitor: bool = True,
    method: str = "quadrature",
) -> DiagnosticsRecord:
    """Assemble one record. The energy residual needs the preceding state and step."""
    ts = t_star(state.T, params.h)
    rec = DiagnosticsRecord(
        t=float(state.t),
        step=step,
        dt=float(dt or 0.0),
        energy=energy(state),
        v_lq={_qlabel(q): lq_norm(state.v, q) for q in Q_SET},
        tstar_lq={_qlabel(q): lq_norm(ts, q) for q in Q_SET},
        sup={
            "v": lq_norm(state.v, math.inf),
            "T": lq_norm(state.T, math.inf),
            "Tstar": lq_norm(ts, math.inf),
        },
        partial=partial_norms(state),
        constraint_residual=constraint_residual(state),
        parity_drift=parity_drift(state),
        lq_growth_ratio=lq_growth_ratio(state, initial_state),
    )
    if prev is not None and dt:
        rec.energy_residual = energy_budget_residual(prev, state, dt, params)
    if monitor:
        a, b = apriori_monitor(state, params, method)
        rec.a_vec, rec.b_vec = tuple(map(float, a)), tuple(map(float, b))
    else:
        rec.a_vec, rec.b_vec = (0.0,) * 9, (0.0,) * 9
    return rec


# ---------------------------------------------------------------------------
# verdicts


@dataclass
class SeriesVerdict:
    passed: bool
    worst_excess: float  # largest norm(t2) - norm(t1) - tol over t1 < t2; <= 0 on pass
    q: str | None = None
    t1: float | None = None
    t2: float | None = None
    tol: float = 0.0
    violations: int = 0


def max_principle_series(records, c: float | None = None, q_set=Q_SET) -> SeriesVerdict:
    """Check ``||T*(t2)||_q <= ||T*(t1)||_q + c dt`` for all record pairs t1 < t2.

    ``dt`` is the largest step recorded in the series; ``c`` defaults to
    ``10 ||T*_0||_inf``. Reports the worst pair across all q.
    """
    if len(records) < 2:
        raise ValueError("need at least two records")
    if c is None:
        c = 10.0 * records[0].tstar_lq["inf"]
    dt = max((r.dt for r in records), default=0.0)
    tol = c * dt
    worst = SeriesVerdict(True, -math.inf, tol=tol)
    count = 0
    for q in (_qlabel(q) for q in q_set):
        series = np.array([r.tstar_lq[q] for r in records])
        running_min = np.minimum.accumulate(series)
        arg_min = np.zeros(len(series), dtype=int)
        for i in range(1, len(series)):
            arg_min[i] = i if series[i] < running_min[i - 1] else arg_min[i - 1]
        excess = series[1:] - running_min[:-1] - tol
        count += int(np.sum(excess > 0))
        j = int(np.argmax(excess))
        if excess[j] > worst.worst_excess:
            i1 = int(arg_min[j])
            worst = SeriesVerdict(
                excess[j] <= 0, float(excess[j]), q, records[i1].t, records[j + 1].t, tol
            )
    worst.violations = count
    worst.passed = count == 0
    return worst


def growth_verdict(records, ceiling: float = GROWTH_CEILING):
    """(passed, max ratio) for the lq growth ratio over a series."""
    top = max((r.lq_growth_ratio for r in records), default=0.0)
    return top <= ceiling, top


__all__ = [
    "Q_SET",
    "DiagnosticsRecord",
    "SeriesVerdict",
    "lq_norm",
    "t_star",
    "energy",
    "energy_budget_residual",
    "constraint_residual",
    "parity_drift",
    "lq_growth_ratio",
    "apriori_monitor",
    "apriori_ratio_series",
    "partial_norms",
    "record",
    "max_principle_series",
    "growth_verdict",
]
