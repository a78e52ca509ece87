import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anisope.domain import Grid, Parity, ScalarField
from anisope.errors import DegenerateRHS
from anisope.inequalities import (
    GronwallSpec,
    LogSobolevQuery,
    SampleField,
    bump,
    gronwall_bound,
    gronwall_verify,
    ladyzhenskaya_ratio,
    ladyzhenskaya_sup,
    ladyzhenskaya_terms,
    log_cascade,
    log_sobolev_rhs,
    log_sobolev_ratio,
    oscillatory_curve,
    random_spec,
    random_triples,
    saturated_trajectories,
)

from conftest import field, sin2pi

E = math.e
PI = np.pi


def _const(grid, c=1.0, parity=Parity.EVEN):
    return field(grid, lambda X, Y, Z: c + 0 * X, parity)


class TestLadyzhenskaya:
    def test_zero(self, grid16):
        z = ScalarField.zeros(grid16, Parity.EVEN)
        assert ladyzhenskaya_ratio(z, z, z) == 0.0

    def test_constants_give_sqrt2(self, grid16):
        one = _const(grid16)
        t = ladyzhenskaya_terms(one, one, one)
        assert t.lhs == pytest.approx(4.0, rel=1e-14)
        assert t.branches[0] == pytest.approx(2 * math.sqrt(2), rel=1e-14)
        assert abs(t.ratio - math.sqrt(2)) < 1e-12

    def test_scale_invariant(self, grid16):
        a, b, c = next(random_triples(grid16, 1, seed=4))
        r = ladyzhenskaya_ratio(a, b, c)
        scaled = [ScalarField(f.grid, f.parity, s * f.values) for f, s in ((a, 3.0), (b, 0.2), (c, 7.0))]
        assert ladyzhenskaya_ratio(*scaled) == pytest.approx(r, rel=1e-12)

    def test_gradient_form(self):
        g = Grid(64, 8, 8)
        one = _const(g)
        Psi = field(g, lambda X, Y, Z: sin2pi(X) + 0 * Y * Z)
        t = ladyzhenskaya_terms(one, one, form="gradient", Psi=Psi)
        # ||Psi||_inf^(1/2) ||grad_H^2 Psi||^(1/2) = (4 pi^2 ||sin||_2)^(1/2) = 2 pi
        assert t.rhs == pytest.approx(4 * PI, rel=1e-12)
        # int_M 2 * 2 * 2 pi |cos 2 pi x| = 16, up to quadrature of |cos|
        assert t.lhs == pytest.approx(16.0, rel=1e-3)

    def test_drop_lower_order_on_gradients(self, grid16):
        f = next(random_triples(grid16, 1, seed=9))
        gx = []
        for a in f:
            vals = np.gradient(a.values, grid16.dx, axis=0)
            gx.append(ScalarField(grid16, Parity.NONE, vals))
        full = ladyzhenskaya_ratio(*gx)
        dropped = ladyzhenskaya_ratio(*gx, drop_lower_order=True)
        assert np.isfinite(dropped) and dropped >= full

    def test_degenerate_rhs(self, grid16):
        # constants have no gradient, so dropping the lower-order terms empties both branches
        one = _const(grid16)
        with pytest.raises(DegenerateRHS):
            ladyzhenskaya_ratio(one, one, one, drop_lower_order=True)

    @pytest.mark.parametrize("kw", [dict(form="other"), dict(form="gradient"), dict(psi=None),
                                    dict(drop_lower_order=("chi",))])
    def test_bad_arguments(self, grid16, kw):
        one = _const(grid16)
        args = dict(psi=one)
        args.update(kw)
        with pytest.raises(ValueError):
            ladyzhenskaya_ratio(one, one, **args)

    def test_triples_grid_independent(self):
        coarse = list(random_triples(Grid(8, 8, 8), 3, seed=1))
        fine = list(random_triples(Grid(16, 16, 16), 3, seed=1))
        for tc, tf in zip(coarse, fine):
            for a, b in zip(tc, tf):
                assert a.parity == b.parity
                np.testing.assert_allclose(a.values, b.values[::2, ::2, ::2], atol=1e-12)

    def test_sup_finite(self, grid16):
        sup, ratios = ladyzhenskaya_sup(grid16, 20, seed=0)
        assert ratios.shape == (20,) and np.all(np.isfinite(ratios))
        assert sup == ratios.max() > 0


class TestLogSobolev:
    def _random2d(self, n=32, seed=0):
        rng = np.random.default_rng(seed)
        x = np.arange(n) / n
        X, Y = np.meshgrid(x, x, indexing="ij")
        vals = sum(rng.standard_normal() * np.sin(2 * PI * (k * X + m * Y) + rng.uniform(0, 6))
                   for k in range(3) for m in range(3))
        return SampleField(vals, (1.0, 1.0))

    def test_norms(self):
        x = np.arange(64) / 64
        F = SampleField(np.sin(2 * PI * x)[:, None] + 0 * x[None, :], (1.0, 1.0))
        assert F.norm(2) == pytest.approx(math.sqrt(0.5), rel=1e-12)
        assert F.grad_norm(math.inf) == pytest.approx(2 * PI, rel=1e-12)
        assert SampleField(np.ones((4, 4)), (2.0, 3.0)).norm(4) == pytest.approx(6 ** 0.25)

    def test_zero(self):
        lhs, rhs, ratio = log_sobolev_ratio(LogSobolevQuery(SampleField(np.zeros((8, 8)), (1, 1))))
        assert lhs == 0 and ratio == 0 and rhs == pytest.approx(1.0)

    @pytest.mark.parametrize("R", [2.0, 4.0])
    def test_scaling_identity(self, R):
        F = self._random2d()
        a = log_sobolev_rhs(F, 6.0, 0.5, R, (2, 4, 8, 16))
        b = log_sobolev_rhs(F.rescaled(R), 6.0, 0.5, 1.0, (2, 4, 8, 16))
        assert abs(a - b) <= 1e-10 * abs(a)

    def test_from_scalar_field(self, random_state):
        q = LogSobolevQuery(random_state.T)
        assert q.F.dim == 3
        lhs, rhs, ratio = log_sobolev_ratio(q)
        assert lhs == pytest.approx(np.max(np.abs(random_state.T.values)))
        assert 0 < ratio < np.inf

    @pytest.mark.parametrize("kw", [dict(p=2.0), dict(lam=0.0), dict(R=-1.0), dict(r_samples=(1.0,))])
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            LogSobolevQuery(SampleField(np.ones((4, 4)), (1, 1)), **kw)

    def test_bump(self):
        assert bump(0.0, 0.4) == 1.0
        assert bump(0.4, 0.4) == 0.0 and bump(1.0, 0.4) == 0.0
        assert 0 < bump(0.2, 0.4) < 1

    def test_oscillatory_curve(self):
        ks, ratios = oscillatory_curve(ks=(1, 4), n=64)
        assert list(ks) == [1, 4]
        assert np.all((ratios > 0) & np.isfinite(ratios))


class TestGronwallBound:
    def test_scalar_case(self):
        b = gronwall_bound(GronwallSpec(1, 1.0, 1.0, [E], 1.0), 1.0)
        assert b.q0 == pytest.approx(E, rel=1e-14)
        assert b.q1 == pytest.approx(math.exp(E), rel=1e-13)
        assert b.Q == pytest.approx(math.exp(E) * E, rel=1e-13)
        assert not b.degenerate and not b.overflow

    def test_q1_matches_ode_solution(self):
        # dA/dt = A log A with A(0) = e has A(t) = exp(exp(t))
        spec = GronwallSpec(1, 1.0, 1.0, [E], 1.0, t_end=1.0)
        for t in (0.25, 0.5, 1.0):
            assert gronwall_bound(spec, t).q1 == pytest.approx(math.exp(math.exp(t)), rel=1e-12)

    def test_zero_K_degenerate(self):
        spec = GronwallSpec(2, 1.0, 1.0, [E, 4.0], 0.0)
        b = gronwall_bound(spec, 1.0)
        cal = 4.0 + E**2
        assert b.degenerate and b.Q == 0.0 and b.log_Q == -math.inf
        assert b.q0 == pytest.approx(math.log(cal), rel=1e-14)
        assert b.q1 == pytest.approx(cal, rel=1e-14)
        assert math.exp(b.log_corrected) == pytest.approx(cal, rel=1e-14)

    def test_cascade(self):
        assert np.exp(log_cascade([E, E], 1.0, 1.0)) == pytest.approx([E, E + E**2], rel=1e-14)
        three = np.exp(log_cascade([E, E, 3.0], 2.0, 2.0))
        assert three[2] == pytest.approx(3.0 + 2 * (E + 2 * E**3) ** 3, rel=1e-13)

    def test_overflow_is_flagged(self):
        b = gronwall_bound(GronwallSpec(4, 3.0, 2.0, [E] * 4, 5.0), 1.0)
        assert b.overflow and b.q1 == math.inf and b.Q == math.inf
        assert b.log_cascade[-1] < 700

    def test_table_matches_constant(self):
        t = np.linspace(0, 2, 201)
        tab = GronwallSpec(2, 1.5, 1.2, [E, 3.0], (t, 0.3 + 0 * t))
        const = GronwallSpec(2, 1.5, 1.2, [E, 3.0], 0.3)
        for s in (0.5, 1.7):
            assert gronwall_bound(tab, s).Q == pytest.approx(gronwall_bound(const, s).Q, rel=1e-12)

    def test_callable_quadrature(self):
        spec = GronwallSpec(1, 1.0, 1.0, [E], lambda s: s**2)
        assert spec.integral(1.5) == pytest.approx(1.5**3 / 3, rel=1e-12)

    @pytest.mark.parametrize("kw", [dict(n=0), dict(alpha=0.5), dict(zeta=0.9), dict(A0=[2.0]),
                                    dict(A0=[E, E]), dict(K=-1.0), dict(t_end=0.0)])
    def test_validation(self, kw):
        args = dict(n=1, alpha=1.0, zeta=1.0, A0=[E], K=1.0)
        args.update(kw)
        with pytest.raises(ValueError):
            GronwallSpec(**args)

    @settings(max_examples=50, deadline=None)
    @given(
        n=st.integers(1, 3),
        k=st.floats(0.0, 0.5),
        dk=st.floats(0.0, 0.5),
        i=st.integers(0, 2),
        da=st.floats(0.0, 3.0),
        t=st.floats(0.01, 1.0),
    )
    def test_monotone_in_K_and_A0(self, n, k, dk, i, da, t):
        A0 = [E] * n
        base = gronwall_bound(GronwallSpec(n, 1.5, 1.5, A0, k), t).log_Q
        more_K = gronwall_bound(GronwallSpec(n, 1.5, 1.5, A0, k + dk), t).log_Q
        A1 = list(A0)
        A1[i % n] += da
        more_A = gronwall_bound(GronwallSpec(n, 1.5, 1.5, A1, k), t).log_Q
        assert more_K >= base and more_A >= base


class TestGronwallVerify:
    def test_saturated_scalar_margin_zero(self):
        spec = GronwallSpec(1, 1.0, 1.0, [E], 1.0, t_end=1.0)
        traj = saturated_trajectories(spec, [0.0], rtol=1e-11, atol=1e-12)
        assert traj.log_A[0, -1] == pytest.approx(E, rel=1e-8)
        v = gronwall_verify(spec, traj)
        assert abs(v.worst_margin_pointwise) < 1e-7
        assert v.holds_pointwise and v.holds_corrected

    def test_strong_dissipation_strict(self):
        spec = GronwallSpec(2, 1.0, 1.0, [2 * E, 2 * E], 0.2, t_end=1.0)

        def final_margin(beta):
            traj = saturated_trajectories(spec, beta)
            assert gronwall_verify(spec, traj).holds_pointwise
            cal = log_cascade(np.exp(traj.log_A[:, -1]), 1.0, 1.0)[-1]
            return gronwall_bound(spec, 1.0).log_q1 - cal

        weak, strong = final_margin([0.0, 0.0]), final_margin([20.0, 20.0])
        assert weak >= 0 and strong > weak + 0.1

    def test_three_component_case(self):
        spec = GronwallSpec(3, 2.0, 2.0, [E, E, E], 0.1, t_end=2.0)
        v = gronwall_verify(spec, saturated_trajectories(spec, [0.5, 0.5, 0.5], rtol=1e-8, atol=1e-10))
        assert v.holds_corrected and v.holds_pointwise
        assert v.worst_margin_corrected >= 0 and v.degenerate_samples == 1

    def test_zero_K_all_degenerate(self):
        spec = GronwallSpec(2, 1.0, 1.0, [E, E], 0.0, t_end=1.0)
        v = gronwall_verify(spec, saturated_trajectories(spec, [1.0, 1.0], n_samples=11))
        assert v.degenerate_samples == 11 and v.holds_q
        assert v.holds_corrected and v.holds_pointwise

    def test_Q_vanishes_near_t0(self):
        # Q(t) -> 0 as t -> 0+ while sum A_i >= n e, so the Q(t) bound alone
        # cannot hold at small t; the verifier must report it
        spec = GronwallSpec(1, 1.0, 1.0, [E], 0.1, t_end=0.1)
        v = gronwall_verify(spec, saturated_trajectories(spec, [0.0], n_samples=11))
        assert not v.holds_q and v.first_failure_t == pytest.approx(0.01)
        assert v.holds_corrected and v.holds_pointwise

    def test_random_specs_corrected_bound(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            spec, beta = random_spec(rng)
            assert spec.n <= 4 and spec.alpha <= 3
            v = gronwall_verify(spec, saturated_trajectories(spec, beta, n_samples=41))
            assert v.holds_corrected and v.holds_pointwise

    def test_beta_validation(self):
        spec = GronwallSpec(2, 1.0, 1.0, [E, E], 0.1)
        with pytest.raises(ValueError):
            saturated_trajectories(spec, [1.0])
        with pytest.raises(ValueError):
            saturated_trajectories(spec, [1.0, -1.0])
