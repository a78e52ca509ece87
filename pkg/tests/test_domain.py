import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anisope.diagnostics import constraint_residual
from anisope.domain import (
    Grid, Params, Parity, ScalarField, State, extend, make_state, parity_defect, reflect, restrict,
)
from anisope.errors import GridMismatch, OddExtensionMismatch, ParityError

from conftest import field, sin2pi


class TestGrid:
    def test_collocation_nodes(self):
        g = Grid(8, 4, 8, h=2.0)
        assert g.x[1] == pytest.approx(1 / 8)
        assert g.y[3] == pytest.approx(3 / 4)
        assert g.z[0] == -2.0
        assert g.z[4] == 0.0
        assert g.Lz == 4.0 and g.volume == 4.0

    @pytest.mark.parametrize("n", [2, 5, 7, 0])
    def test_rejects_bad_sizes(self, n):
        with pytest.raises(ValueError):
            Grid(n, 8, 8)

    def test_rejects_nonpositive_h(self):
        with pytest.raises(ValueError):
            Grid(8, 8, 8, h=0.0)

    def test_reflect_index_maps_z_to_minus_z(self):
        g = Grid(4, 4, 8, h=1.5)
        z = g.z
        k = g.reflect_index()
        # z_k and z_{-k} are mirror images, modulo the period 2h at k = 0
        np.testing.assert_allclose(np.mod(z[k] + z + 1.5, 3.0), 1.5 * np.ones(8) % 3.0)


class TestScalarField:
    def test_values_are_read_only(self, grid16):
        f = ScalarField.zeros(grid16, Parity.EVEN)
        with pytest.raises(ValueError):
            f.values[0, 0, 0] = 1.0

    def test_parity_is_checked(self, grid16):
        with pytest.raises(ParityError):
            field(grid16, lambda X, Y, Z: np.sin(np.pi * Z) + 0 * X, Parity.EVEN)
        field(grid16, lambda X, Y, Z: np.sin(np.pi * Z) + 0 * X, Parity.ODD)

    def test_shape_is_checked(self, grid16):
        with pytest.raises(GridMismatch):
            ScalarField(grid16, Parity.NONE, np.zeros((4, 4, 4)))

    def test_rejects_nonfinite(self, grid16):
        a = np.zeros(grid16.shape)
        a[1, 1, 1] = np.nan
        with pytest.raises(ValueError):
            ScalarField(grid16, Parity.NONE, a)

    def test_parity_algebra(self):
        assert Parity.EVEN * Parity.ODD is Parity.ODD
        assert Parity.ODD * Parity.ODD is Parity.EVEN
        assert Parity.EVEN.flip() is Parity.ODD
        assert Parity.NONE.flip() is Parity.NONE


class TestExtend:
    def test_even_z_squared(self, grid16_h):
        g = grid16_h
        zh = g.z[: g.half_nz]
        half = np.broadcast_to(zh**2, (g.nx, g.ny, g.half_nz))
        f = extend(half, Parity.EVEN, g)
        np.testing.assert_allclose(f.values, np.broadcast_to(g.z**2, g.shape), atol=1e-15)
        assert parity_defect(f.values, Parity.EVEN) == 0.0

    def test_odd_zero(self, grid16):
        f = extend(np.zeros((16, 16, 9)), Parity.ODD, grid16)
        assert np.all(f.values == 0.0)

    def test_odd_sine(self, grid16_h):
        g = grid16_h
        s = np.sin(np.pi * g.z / g.h)
        half = np.broadcast_to(s[: g.half_nz], (g.nx, g.ny, g.half_nz)).copy()
        half[..., 0] = 0.0  # sin(-pi) is round-off, not zero
        half[..., -1] = 0.0
        f = extend(half, Parity.ODD, g)
        np.testing.assert_allclose(f.values, np.broadcast_to(s, g.shape), atol=1e-15)

    def test_odd_precondition_rejected(self, grid16):
        half = np.zeros((16, 16, 9))
        half[3, 4, 8] = 1e-6  # value on z = 0
        with pytest.raises(OddExtensionMismatch):
            extend(half, Parity.ODD, grid16)
        half[3, 4, 8] = 0.0
        half[0, 0, 0] = -1e-3  # value on z = -h
        with pytest.raises(OddExtensionMismatch):
            extend(half, Parity.ODD, grid16)

    def test_none_parity_rejected(self, grid16):
        with pytest.raises(ParityError):
            extend(np.zeros((16, 16, 9)), Parity.NONE, grid16)

    def test_wrong_shape(self, grid16):
        with pytest.raises(GridMismatch):
            extend(np.zeros((16, 16, 16)), Parity.EVEN, grid16)

    def test_restrict_zero(self, grid16):
        assert np.all(restrict(ScalarField.zeros(grid16)) == 0.0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), parity=st.sampled_from([Parity.EVEN, Parity.ODD]))
def test_round_trips_are_exact(seed, parity):
    g = Grid(8, 6, 8)
    half = np.random.default_rng(seed).standard_normal((8, 6, 5))
    if parity is Parity.ODD:
        half[..., 0] = 0.0
        half[..., -1] = 0.0
    f = extend(half, parity, g)
    assert np.array_equal(restrict(f), half)
    again = extend(restrict(f), parity, g)
    assert np.array_equal(again.values, f.values)
    # the other parity component vanishes identically
    assert np.array_equal(f.values, parity.sign * reflect(f.values))


class TestMakeState:
    def test_zero(self, grid16):
        z = ScalarField.zeros(grid16, Parity.EVEN)
        s = make_state(z, z, ScalarField.zeros(grid16, Parity.ODD), t=0.25)
        assert s.t == 0.25
        assert all(np.all(a == 0) for a in s.arrays)

    def test_solenoidal_unchanged(self, grid16):
        v1 = field(grid16, lambda X, Y, Z: sin2pi(Y) + 0 * X + 0 * Z, Parity.EVEN)
        z = ScalarField.zeros(grid16, Parity.EVEN)
        s = make_state(v1, z, ScalarField.zeros(grid16, Parity.ODD))
        np.testing.assert_allclose(s.v1.values, v1.values, atol=1e-14)
        assert constraint_residual(s) <= 1e-12

    def test_projection_enforces_constraint(self, grid16):
        v1 = field(grid16, lambda X, Y, Z: sin2pi(X) + 0 * Y + 0 * Z, Parity.EVEN)
        z = ScalarField.zeros(grid16, Parity.EVEN)
        T = ScalarField.zeros(grid16, Parity.ODD)
        before = constraint_residual(State((v1, z), T))
        after = constraint_residual(make_state(v1, z, T))
        assert before == pytest.approx(4 * np.pi / np.sqrt(2), rel=1e-12)
        assert after <= 1e-12

    def test_parity_and_grid_errors(self, grid16):
        e = ScalarField.zeros(grid16, Parity.EVEN)
        o = ScalarField.zeros(grid16, Parity.ODD)
        with pytest.raises(ParityError):
            make_state(e, e, e)
        with pytest.raises(GridMismatch):
            make_state(e, e, ScalarField.zeros(Grid(8, 8, 8), Parity.ODD))
        make_state(e, e, o)


class TestParams:
    def test_defaults(self):
        p = Params()
        assert (p.h, p.f0, p.eps, p.cfl) == (1.0, 1.0, 1e-3, 0.5)

    @pytest.mark.parametrize("kw", [dict(h=0), dict(eps=-1), dict(cfl=1.5), dict(t_end=0)])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            Params(**kw)
