"""Numerical verifiers for the functional inequalities behind the estimates.

* a Ladyzhenskaya-type bound for integrals of the form
  ``int_M (int |phi| dz)(int |varphi psi| dz)``;
* a logarithmic Sobolev bound of ``||F||_inf`` by ``sup_r ||F||_r / r^lambda``
  times a logarithm of ``W^{1,p}`` norms;
* the system Gronwall lemma with its explicit double-exponential bound.

Every inequality is evaluated with the generic constant set to 1, so ratios
are empirical constants. Nothing here asserts a value for those constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.fft as sfft
from scipy.integrate import cumulative_trapezoid, quad, solve_ivp
from scipy.special import logsumexp

from .domain import Grid, Parity, ScalarField
from .errors import DegenerateRHS
from .spectral import bandlimited, ops_for

R_SAMPLES = (2, 4, 8, 16, 32, 64)
LOG_OVERFLOW = 700.0
FIELD_NAMES = ("phi", "varphi", "psi")

# ---------------------------------------------------------------------------
# Ladyzhenskaya-type integrals


def _norm2(values, cell) -> float:
    return math.sqrt(cell * float(np.sum(values * values)))


def _grad_h(f: ScalarField):
    ops = ops_for(f.grid)
    fh = ops.fwd(f.values)
    return ops.inv(ops.ikx * fh), ops.inv(ops.iky * fh), fh, ops


@dataclass
class LadyzhenskayaTerms:
    lhs: float
    branches: tuple
    rhs: float
    ratio: float


def ladyzhenskaya_terms(phi, varphi, psi=None, form="product", Psi=None,
                        drop_lower_order=()) -> LadyzhenskayaTerms:
    """Both sides of the Ladyzhenskaya-type inequality with C = 1.

    ``form="product"`` bounds ``int_M (int|phi|dz)(int|varphi psi|dz)``;
    ``form="gradient"`` replaces ``psi`` by ``grad_H Psi`` and the psi factor by
    ``||Psi||_inf^(1/2) ||grad_H^2 Psi||_2^(1/2)``. ``drop_lower_order`` lists
    the fields (``"phi"``, ``"varphi"``, ``"psi"``, or True for all) whose
    ``||.||_2^(1/2)`` term inside the parentheses is omitted, as allowed when
    that field is a horizontal gradient.
    """
    if form not in ("product", "gradient"):
        raise ValueError("form must be 'product' or 'gradient'")
    if form == "gradient" and Psi is None:
        raise ValueError("form='gradient' requires Psi")
    if form == "product" and psi is None:
        raise ValueError("form='product' requires psi")
    if drop_lower_order is True:
        drop = set(FIELD_NAMES)
    else:
        drop = set(drop_lower_order or ())
        unknown = drop - set(FIELD_NAMES)
        if unknown:
            raise ValueError(f"unknown field names {sorted(unknown)}")
    g = phi.grid
    fields = [phi, varphi] + ([psi] if form == "product" else [Psi])
    if any(f.grid != g for f in fields):
        raise ValueError("fields must share one grid")
    cell = g.volume / np.prod(g.shape)
    dz = g.dz

    if form == "product":
        second = np.abs(varphi.values * psi.values)
    else:
        Px, Py, Ph, ops = _grad_h(Psi)
        second = np.abs(varphi.values) * np.sqrt(Px * Px + Py * Py)
    col_phi = np.abs(phi.values).sum(axis=2) * dz
    col_second = second.sum(axis=2) * dz
    lhs = g.dx * g.dy * float(np.sum(col_phi * col_second))

    def half_factor(f, name):
        """||f||^(1/2) (||f||^(1/2) + ||grad_H f||^(1/2))."""
        fx, fy, _, _ = _grad_h(f)
        n0 = _norm2(f.values, cell)
        n1 = math.sqrt(_norm2(fx, cell) ** 2 + _norm2(fy, cell) ** 2)
        inner = (0.0 if name in drop else math.sqrt(n0)) + math.sqrt(n1)
        return math.sqrt(n0) * inner

    n_phi = _norm2(phi.values, cell)
    n_var = _norm2(varphi.values, cell)
    h_phi = half_factor(phi, "phi")
    h_var = half_factor(varphi, "varphi")
    if form == "product":
        third = half_factor(psi, "psi")
    else:
        hess = [ops.inv(a * b * Ph) for a, b in ((ops.ikx, ops.ikx), (ops.ikx, ops.iky),
                                                  (ops.iky, ops.ikx), (ops.iky, ops.iky))]
        n_hess = math.sqrt(sum(_norm2(c, cell) ** 2 for c in hess))
        third = math.sqrt(float(np.max(np.abs(Psi.values)))) * math.sqrt(n_hess)
    branches = (h_phi * n_var * third, n_phi * h_var * third)
    rhs = min(branches)
    if lhs == 0.0:
        ratio = 0.0
    elif rhs == 0.0:
        raise DegenerateRHS(f"right side vanishes while the integral is {lhs:.3e}")
    else:
        ratio = lhs / rhs
    return LadyzhenskayaTerms(lhs, branches, rhs, ratio)


def ladyzhenskaya_ratio(phi, varphi, psi=None, form="product", Psi=None,
                        drop_lower_order=()) -> float:
    """LHS / RHS of the Ladyzhenskaya-type inequality with C = 1 (0 when LHS = 0)."""
    return ladyzhenskaya_terms(phi, varphi, psi, form, Psi, drop_lower_order).ratio


def random_triples(grid: Grid, count: int, seed: int = 0, kmax: int = 4,
                   decay: float = 2.0):
    """Reproducible band-limited triples; draw i is identical on every grid.

    Each field gets its own generator seeded from ``(seed, i, j)``, and its
    parity (even or odd in z) is drawn from that generator too.
    """
    for i in range(count):
        triple = []
        for j in range(3):
            rng = np.random.default_rng([seed, i, j])
            parity = Parity.EVEN if rng.random() < 0.5 else Parity.ODD
            triple.append(ScalarField(grid, parity, bandlimited(grid, rng, parity, kmax, kmax, decay)))
        yield tuple(triple)


def ladyzhenskaya_sup(grid: Grid, count: int, seed: int = 0, form="product",
                      kmax: int = 4, decay: float = 2.0):
    """Empirical sup of the ratio over ``count`` random triples; returns (sup, ratios)."""
    ratios = np.empty(count)
    for i, (a, b, c) in enumerate(random_triples(grid, count, seed, kmax, decay)):
        if form == "product":
            ratios[i] = ladyzhenskaya_ratio(a, b, c)
        else:
            ratios[i] = ladyzhenskaya_ratio(a, b, form="gradient", Psi=c)
    return float(np.max(ratios)), ratios


# ---------------------------------------------------------------------------
# logarithmic Sobolev bound


@dataclass(frozen=True, eq=False)
class SampleField:
    """Values of a periodic function on a uniform grid of an N-dimensional box."""

    values: np.ndarray
    lengths: tuple

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != len(self.lengths):
            raise ValueError("one length per axis is required")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "lengths", tuple(float(L) for L in self.lengths))

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def cell(self) -> float:
        return float(np.prod(self.lengths)) / self.values.size

    @classmethod
    def from_scalar(cls, f: ScalarField) -> "SampleField":
        g = f.grid
        return cls(f.values, (g.Lx, g.Ly, g.Lz))

    def rescaled(self, R: float) -> "SampleField":
        """``F_R(x) = F(R x)``: the same samples on a box shrunk by ``R``."""
        return SampleField(self.values, tuple(L / R for L in self.lengths))

    def norm(self, r) -> float:
        mag = np.abs(self.values)
        top = float(np.max(mag, initial=0.0))
        if math.isinf(r) or top == 0.0:
            return top
        return top * (self.cell * float(np.sum((mag / top) ** r))) ** (1.0 / r)

    def grad_norm(self, p) -> float:
        """``|| |grad F| ||_p`` with spectral derivatives (Nyquist dropped)."""
        fh = sfft.fftn(self.values)
        sq = np.zeros(self.values.shape)
        for axis, (n, L) in enumerate(zip(self.values.shape, self.lengths)):
            m = np.fft.fftfreq(n, 1.0 / n)
            k = 2j * np.pi * m / L
            k[np.abs(m) == n // 2] = 0.0
            shape = [1] * self.dim
            shape[axis] = n
            d = sfft.ifftn(k.reshape(shape) * fh).real
            sq += d * d
        return SampleField(np.sqrt(sq), self.lengths).norm(p)


@dataclass
class LogSobolevQuery:
    F: object  # SampleField or ScalarField
    p: float = 6.0
    lam: float = 0.5
    R: float = 1.0
    r_samples: Sequence[float] = R_SAMPLES

    def __post_init__(self):
        if isinstance(self.F, ScalarField):
            self.F = SampleField.from_scalar(self.F)
        if not self.p > self.F.dim:
            raise ValueError(f"need p > dimension {self.F.dim}, got p = {self.p}")
        if not self.lam > 0 or not self.R > 0:
            raise ValueError("lambda and R must be positive")
        if not self.r_samples or min(self.r_samples) < 2:
            raise ValueError("r_samples must be nonempty with every r >= 2")


def log_sobolev_rhs(F: SampleField, p, lam, R, r_samples) -> float:
    N = F.dim
    sup_r = max(F.norm(r) / (r**lam * R ** (N / r)) for r in r_samples)
    arg = math.e + F.norm(p) / R ** (N / p) + F.grad_norm(p) / R ** (N / p - 1)
    return max(1.0, sup_r) * math.log(arg) ** lam


def log_sobolev_ratio(query: LogSobolevQuery):
    """(lhs, rhs_no_constant, ratio) with lhs = ||F||_inf and the sup over r sampled."""
    F = query.F
    lhs = F.norm(math.inf)
    rhs = log_sobolev_rhs(F, query.p, query.lam, query.R, query.r_samples)
    return lhs, rhs, lhs / rhs


def bump(r, radius):
    """Smooth compactly supported bump ``exp(1 - 1/(1 - (r/radius)^2))``, equal to 1 at 0."""
    s = np.clip(np.asarray(r, dtype=float) / radius, 0.0, 1.0)
    out = np.zeros_like(s)
    inside = s < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def oscillatory_family(ks=range(1, 65), n: int = 256, radius: float = 0.4):
    """2-D fields ``bump(|x - c|) sin(2 pi k x)`` on the unit square, one per k."""
    x = np.arange(n) / n
    X, Y = np.meshgrid(x, x, indexing="ij")
    envelope = bump(np.hypot(X - 0.5, Y - 0.5), radius)
    for k in ks:
        yield k, SampleField(envelope * np.sin(2 * np.pi * k * X), (1.0, 1.0))


def oscillatory_curve(ks=range(1, 65), n=256, p=6.0, lam=0.5, R=1.0, r_samples=R_SAMPLES):
    """(ks, ratios) of the log-Sobolev ratio over the oscillatory family."""
    out_k, out_r = [], []
    for k, F in oscillatory_family(ks, n):
        out_k.append(k)
        out_r.append(log_sobolev_ratio(LogSobolevQuery(F, p, lam, R, r_samples))[2])
    return np.array(out_k), np.array(out_r)


# ---------------------------------------------------------------------------
# system Gronwall lemma


@dataclass
class GronwallSpec:
    """Inputs of the system Gronwall bound.

    ``K`` is a callable, a constant, or a table ``(t, K(t))``; ``K_integral``
    optionally gives ``int_0^t K`` in closed form.
    """

    n: int
    alpha: float
    zeta: float
    A0: Sequence[float]
    K: object = 1.0
    t_end: float = 1.0
    K_integral: Callable | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be a positive integer")
        if self.alpha < 1 or self.zeta < 1:
            raise ValueError("alpha and zeta must be >= 1")
        self.A0 = tuple(float(a) for a in self.A0)
        if len(self.A0) != self.n:
            raise ValueError("A0 must have n entries")
        if min(self.A0) < math.e * (1 - 1e-15):
            raise ValueError("every A0 entry must be >= e")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if isinstance(self.K, tuple):
            t, k = (np.asarray(a, dtype=float) for a in self.K)
            if np.any(k < 0):
                raise ValueError("K must be nonnegative")
            self._table = (t, k, cumulative_trapezoid(k, t, initial=0.0))
        else:
            self._table = None
            if np.isscalar(self.K) and self.K < 0:
                raise ValueError("K must be nonnegative")

    def K_at(self, t):
        if self._table is not None:
            return np.interp(t, self._table[0], self._table[1])
        if callable(self.K):
            return self.K(t)
        return float(self.K) + 0.0 * np.asarray(t, dtype=float)

    def integral(self, t: float) -> float:
        """``int_0^t K``: closed form, exact for constants, trapezoid for tables, else quad."""
        if self.K_integral is not None:
            return float(self.K_integral(t))
        if self._table is not None:
            return float(np.interp(t, self._table[0], self._table[2]))
        if not callable(self.K):
            return float(self.K) * t
        return float(quad(self.K, 0.0, t, limit=200, epsabs=1e-14, epsrel=1e-13)[0])


def log_cascade(A, alpha, zeta) -> np.ndarray:
    """``log calA_i`` for ``calA_1 = A_1``, ``calA_i = A_i + zeta calA_{i-1}^(alpha+1)``."""
    logs = np.empty(len(A))
    logs[0] = math.log(A[0])
    for i in range(1, len(A)):
        logs[i] = np.logaddexp(math.log(A[i]), math.log(zeta) + (alpha + 1) * logs[i - 1])
    return logs


@dataclass
class GronwallBound:
    t: float
    log_cascade: np.ndarray
    q0: float
    log_q1: float
    log_Q: float  # -inf when Q = 0
    degenerate: bool  # int_0^t K = 0, so Q vanishes
    overflow: bool  # q1 or Q not representable as a float; use the log values
    cascade_A: np.ndarray = field(default=None)
    q1: float = math.inf
    Q: float = math.inf

    @property
    def log_corrected(self) -> float:
        """log of ``calA_N(0) + Q(t)``, the bound that the integration step actually yields."""
        return float(np.logaddexp(self.log_cascade[-1], self.log_Q))


def gronwall_bound(spec: GronwallSpec, t: float) -> GronwallBound:
    """``q0 = e^{(alpha+1)^(n-1) int K} log calA_n(0)``, ``q1 = e^{q0}`` and
    ``Q = (alpha+1)^(n-1) int_0^t K q1 q0``, with log-domain fallbacks."""
    logs = log_cascade(spec.A0, spec.alpha, spec.zeta)
    growth = (spec.alpha + 1) ** (spec.n - 1)
    IK = spec.integral(t)
    log_q0 = growth * IK + math.log(logs[-1])
    q0 = math.exp(log_q0) if log_q0 < LOG_OVERFLOW else math.inf
    log_q1 = q0 if math.isfinite(q0) else math.inf
    degenerate = IK == 0.0
    if degenerate:
        log_Q = -math.inf
    else:
        # log Q = log(growth IK) + log q1 + log q0
        log_Q = math.log(growth * IK) + (q0 if math.isfinite(q0) else math.inf) + log_q0
    overflow = not (log_q1 < LOG_OVERFLOW and log_Q < LOG_OVERFLOW)
    with np.errstate(over="ignore"):
        cascade_A = np.exp(logs)
    return GronwallBound(
        t=t,
        log_cascade=logs,
        q0=q0,
        log_q1=log_q1,
        log_Q=log_Q,
        degenerate=degenerate,
        overflow=overflow,
        cascade_A=cascade_A,
        q1=math.exp(log_q1) if log_q1 < LOG_OVERFLOW else math.inf,
        Q=0.0 if degenerate else (math.exp(log_Q) if log_Q < LOG_OVERFLOW else math.inf),
    )


# ODE oracle --------------------------------------------------------------


@dataclass
class Trajectories:
    t: np.ndarray
    log_A: np.ndarray  # shape (n, len(t))
    log_intB: np.ndarray  # log(1 + int_0^t B_i), shape (n, len(t))

    def log_lhs(self) -> np.ndarray:
        """``log(sum_i A_i + sum_i int B_i)`` at every sample time."""
        J = self.log_intB
        with np.errstate(divide="ignore"):
            ib = np.where(J > 0, J + np.log(-np.expm1(-np.maximum(J, 1e-300))), -np.inf)
        return logsumexp(np.vstack([self.log_A, ib]), axis=0)


def saturated_trajectories(spec: GronwallSpec, beta: Sequence[float], n_samples: int = 101,
                           rtol: float = 1e-9, atol: float = 1e-11) -> Trajectories:
    """Integrate the hypotheses with equality and ``m = K log sum A_i``.

    ``B_i = beta_i (A_i - e) >= 0`` keeps every ``A_i >= e``. The system is
    solved for ``y_i = log A_i`` and ``log(1 + int B_i)`` with an implicit
    Runge-Kutta method, independent of the closed-form bound.
    """
    n = spec.n
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (n,) or np.any(beta < 0):
        raise ValueError("beta must hold n nonnegative entries")
    log_beta = np.log(np.where(beta > 0, beta, 1.0))
    a, lz = spec.alpha, math.log(spec.zeta)

    def log_B(y):
        excess = -np.expm1(np.minimum(1.0 - y, 0.0))  # 1 - e/A
        with np.errstate(divide="ignore"):
            out = log_beta + y + np.log(excess)
        return np.where(beta > 0, out, -np.inf)

    def rhs(t, s):
        y, J = s[:n], s[n:]
        m = float(spec.K_at(t)) * logsumexp(y)
        lB = log_B(y)
        dy = m - np.exp(lB - y)
        dy[1:] += np.exp(lz + a * y[:-1] + lB[:-1] - y[1:])
        dJ = np.exp(lB - J)
        return np.concatenate([dy, dJ])

    y0 = np.concatenate([np.log(spec.A0), np.zeros(n)])
    t_eval = np.linspace(0.0, spec.t_end, n_samples)
    sol = solve_ivp(rhs, (0.0, spec.t_end), y0, method="Radau", t_eval=t_eval,
                    rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(f"ODE oracle failed: {sol.message}")
    return Trajectories(sol.t, sol.y[:n], sol.y[n:])


@dataclass
class GronwallVerdict:
    holds_q: bool  # sum A + sum int B <= Q(t) (1 + slack) at every non-degenerate sample
    holds_corrected: bool  # ... <= calA_n(0) + Q(t)
    holds_pointwise: bool  # calA_n(t) <= q1(t)
    worst_margin_q: float  # min over samples of log bound - log lhs
    worst_margin_corrected: float
    worst_margin_pointwise: float
    first_failure_t: float | None = None  # earliest sample violating the Q(t) bound
    degenerate_samples: int = 0  # samples with int_0^t K = 0, where Q(t) = 0 is not checked


def gronwall_verify(spec: GronwallSpec, traj: Trajectories, slack: float = 1e-6) -> GronwallVerdict:
    """Compare ODE trajectories with the Q(t) bound, the corrected bound and q1.

    Margins are differences of logarithms, so they stay meaningful where q1 or
    Q overflow. A negative margin beyond ``log(1 + slack)`` is a violation.
    Samples with ``int_0^t K = 0`` (always including t = 0) make Q vanish; they
    are counted and excluded from the Q(t) check but not from the other two.
    """
    tol = math.log1p(slack)
    lhs = traj.log_lhs()
    m_q, m_corrected, m_point = [], [], []
    degenerate = 0
    for j, t in enumerate(traj.t):
        b = gronwall_bound(spec, float(t))
        if b.degenerate:
            degenerate += 1
            m_q.append(math.inf)
        else:
            m_q.append(b.log_Q - lhs[j])
        m_corrected.append(b.log_corrected - lhs[j])
        A_t = np.exp(np.minimum(traj.log_A[:, j], LOG_OVERFLOW))
        log_calA = log_cascade(A_t, spec.alpha, spec.zeta)[-1]
        m_point.append(b.log_q1 - log_calA)
    m_q, m_corrected, m_point = map(np.array, (m_q, m_corrected, m_point))
    bad = np.nonzero(m_q < -tol)[0]
    return GronwallVerdict(
        holds_q=bad.size == 0,
        holds_corrected=bool(np.all(m_corrected >= -tol)),
        holds_pointwise=bool(np.all(m_point >= -tol)),
        worst_margin_q=float(np.min(m_q)),
        worst_margin_corrected=float(np.min(m_corrected)),
        worst_margin_pointwise=float(np.min(m_point)),
        first_failure_t=float(traj.t[bad[0]]) if bad.size else None,
        degenerate_samples=degenerate,
    )


def random_spec(rng: np.random.Generator, t_end: float = 1.0):
    """Random spec with n <= 4, alpha <= 3, smooth K >= 0, plus dissipation rates beta."""
    n = int(rng.integers(1, 5))
    alpha = float(rng.uniform(1.0, 3.0))
    zeta = float(rng.uniform(1.0, 2.0))
    A0 = tuple(math.e * (1.0 + rng.uniform(0.0, 1.0, n)))
    c0, c1, w, phase = rng.uniform(0.0, 0.3), rng.uniform(0.0, 0.3), rng.uniform(0.5, 6.0), rng.uniform(0, 2 * np.pi)

    def K(t, c0=c0, c1=c1, w=w, phase=phase):
        return c0 + c1 * np.sin(w * t + phase) ** 2

    def K_int(t, c0=c0, c1=c1, w=w, phase=phase):
        return c0 * t + c1 * (t / 2 - (np.sin(2 * (w * t + phase)) - np.sin(2 * phase)) / (4 * w))

    beta = rng.uniform(0.0, 2.0, n)
    return GronwallSpec(n, alpha, zeta, A0, K, t_end, K_int), beta


__all__ = [
    "R_SAMPLES",
    "LadyzhenskayaTerms",
    "ladyzhenskaya_terms",
    "ladyzhenskaya_ratio",
    "random_triples",
    "ladyzhenskaya_sup",
    "SampleField",
    "LogSobolevQuery",
    "log_sobolev_rhs",
    "log_sobolev_ratio",
    "bump",
    "oscillatory_family",
    "oscillatory_curve",
    "GronwallSpec",
    "GronwallBound",
    "log_cascade",
    "gronwall_bound",
    "Trajectories",
    "saturated_trajectories",
    "GronwallVerdict",
    "gronwall_verify",
    "random_spec",
]
