import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from supconv.errors import DomainError, EllipticityError, SingularOperator
from supconv.mesh import (
    Grid,
    MatrixField,
    ScalarField,
    VectorField,
    assemble_convection_rhs,
    assemble_diffusion,
    convection_matrix,
    critical_exponents,
    h1_seminorm,
    integral,
    lebesgue_norm,
    levelset_measure,
    orlicz_nlogn_norm,
    sobolev_constant,
    truncate,
)

from conftest import simpson

# (pi N (N-2))^(-1/2) (Gamma(N)/Gamma(N/2))^(1/N), mpmath at 30 digits
TALENTI = {
    3: 0.427260542862526664987671611299,
    4: 0.312189205697777951677316062926,
    5: 0.25983308068493431193791949293,
}


@pytest.fixture
def square16():
    return Grid.rectangle(0, 1, 0, 1, 16, 16)


class TestGrid:
    def test_shapes(self):
        g = Grid.rectangle(0, 2, 0, 1, 8, 4)
        assert g.interior_shape == (7, 3)
        assert g.face_shape(0) == (8, 5)
        assert g.face_shape(1) == (9, 4)
        assert g.spacing == (0.25, 0.25)
        assert g.cell_measure == 0.0625
        assert g.measure == 2.0
        assert g.dim == 2

    def test_validation(self):
        with pytest.raises(ValueError):
            Grid.interval(0, 1, 3)
        with pytest.raises(ValueError):
            Grid.interval(1, 1, 8)

    def test_dict_round_trip(self):
        for g in (Grid.interval(-1, 1, 10), Grid.rectangle(0, 1, 0, 3, 5, 7)):
            assert Grid.from_dict(g.to_dict()) == g


class TestDiffusion:
    def test_classical_stencil(self):
        g = Grid.interval(0, 1, 4)
        A = assemble_diffusion(MatrixField.identity(g)).toarray()
        expected = np.array([[2, -1, 0], [-1, 2, -1], [0, -1, 2]]) / 0.25 ** 2
        np.testing.assert_allclose(A, expected, rtol=0, atol=1e-12)

    def test_linear_in_M(self, square16):
        A1 = assemble_diffusion(MatrixField.identity(square16))
        A2 = assemble_diffusion(MatrixField.identity(square16, 2.0))
        assert abs(A2 - 2 * A1).max() == 0.0

    def test_mass_term_shifts_spectrum(self, square16):
        A = assemble_diffusion(MatrixField.identity(square16), mu=1.0).toarray()
        A0 = assemble_diffusion(MatrixField.identity(square16)).toarray()
        np.testing.assert_allclose(A - A0, np.eye(A.shape[0]), atol=1e-12)
        assert np.allclose(A, A.T)
        assert np.linalg.eigvalsh(A).min() >= 1.0

    def test_harmonic_averaging_across_jump(self):
        g = Grid.interval(0, 1, 4)
        a = np.array([1.0, 1.0, 3.0, 3.0]).reshape(4, 1, 1)
        A = assemble_diffusion(MatrixField(g, a)).toarray() * 0.25 ** 2
        # 1D edges coincide with cells: coefficients 1, 1, 3, 3 on the four edges
        np.testing.assert_allclose(A, [[2, -1, 0], [-1, 4, -3], [0, -3, 6]], atol=1e-12)
        g2 = Grid.rectangle(0, 1, 0, 1, 4, 4)
        vals = np.zeros((4, 4, 2, 2))
        vals[..., 0, 0] = vals[..., 1, 1] = np.where(np.arange(4)[:, None] < 2, 1.0, 3.0)
        A2 = assemble_diffusion(MatrixField(g2, vals)).toarray() * 0.25 ** 2
        # node (2, 1) sits on the jump x = 0.5; its vertical edges border one cell of each side
        row = 1 * 3 + 0  # unknown index of interior node (i=2, j=1)
        assert A2[row, row + 1] == pytest.approx(-2 * 1 * 3 / (1 + 3))

    def test_rejects_off_diagonal_and_degenerate(self, square16):
        M = np.array([[2.0, 0.5], [0.5, 2.0]])
        with pytest.raises(DomainError):
            assemble_diffusion(MatrixField(square16, M))
        with pytest.raises(EllipticityError):
            MatrixField(square16, np.array([[1.0, 0.0], [0.0, -1.0]]))
        with pytest.raises(EllipticityError):
            MatrixField(square16, np.array([[1.0, 0.2], [0.0, 1.0]]))
        g = Grid.interval(0, 1, 4)
        with pytest.raises(SingularOperator):
            assemble_diffusion(MatrixField.identity(g, 1e-320))

    def test_declared_bounds_checked(self, square16):
        MatrixField(square16, np.eye(2), alpha=1.0, beta=1.0)
        with pytest.raises(EllipticityError):
            MatrixField(square16, np.eye(2), alpha=1.5)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_discrete_ellipticity(self, seed):
        rng = np.random.default_rng(seed)
        g = Grid.rectangle(0, 1, 0, 2, 8, 6)
        vals = np.zeros(g.cells + (2, 2))
        vals[..., 0, 0] = rng.uniform(0.5, 4.0, g.cells)
        vals[..., 1, 1] = rng.uniform(0.5, 4.0, g.cells)
        Mf = MatrixField(g, vals)
        A = assemble_diffusion(Mf)
        v = rng.normal(size=g.size)
        energy = v @ (A @ v) * g.cell_measure
        assert energy >= Mf.alpha * h1_seminorm(ScalarField(g, v)) ** 2 * (1 - 1e-12)


class TestConvection:
    def test_zero_inputs(self, square16):
        g = ScalarField.zeros(square16)
        E = VectorField.constant(square16, (1.0, -2.0))
        assert not np.any(assemble_convection_rhs(E, g).values)
        u = ScalarField.from_function(square16, lambda x, y: np.sin(3 * x) + y)
        assert not np.any(assemble_convection_rhs(VectorField.zeros(square16), u).values)

    def test_brute_force_flux_enumeration(self):
        g = Grid.rectangle(0, 1, 0, 1, 8, 8)
        E = VectorField.constant(g, (1.0, 0.0))
        u = ScalarField.from_function(g, lambda x, y: np.clip(4 * x - 1, 0, 1) * (y > 0.3))
        got = assemble_convection_rhs(E, u).values
        full = np.zeros((9, 9))
        full[1:-1, 1:-1] = u.values
        h = 1 / 8
        ref = np.zeros((7, 7))
        for i in range(1, 8):
            for j in range(1, 8):
                # upwind value of u at the faces i-1/2 and i+1/2 for a rightward drift
                flux_in = 1.0 * full[i - 1, j]
                flux_out = 1.0 * full[i, j]
                ref[i - 1, j - 1] = (flux_in - flux_out) / h
        np.testing.assert_allclose(got, ref, rtol=0, atol=1e-12)

    def test_conservation_for_interior_support(self, square16):
        rng = np.random.default_rng(0)
        E = VectorField(square16, tuple(rng.normal(size=square16.face_shape(d)) for d in range(2)))
        vals = np.zeros(square16.interior_shape)
        vals[3:-3, 3:-3] = rng.normal(size=(9, 9))
        out = assemble_convection_rhs(E, ScalarField(square16, vals))
        assert abs(integral(out)) < 1e-12

    def test_boundary_flux_balance(self):
        g = Grid.interval(0, 1, 10)
        E = VectorField.constant(g, (2.0,))
        u = ScalarField.from_function(g, lambda x: 1 + 0 * x)
        # everything entering node 1 from the boundary is zero, the last node pushes 2*1 out
        assert integral(assemble_convection_rhs(E, u)) == pytest.approx(-2.0)

    def test_upwind_is_z_matrix(self, square16):
        rng = np.random.default_rng(1)
        E = VectorField(square16, tuple(rng.normal(size=square16.face_shape(d)) for d in range(2)))
        C = convection_matrix(E).toarray()
        off = -C - np.diag(np.diag(-C))
        assert off.max() <= 0.0

    def test_centered_mode(self):
        g = Grid.interval(0, 1, 8)
        E = VectorField.constant(g, (1.0,))
        u = ScalarField.from_function(g, lambda x: x * (1 - x))
        c = assemble_convection_rhs(E, u, scheme="centered").values
        # -(d/dx)(x(1-x)) = 2x - 1, exact for the centered difference of a quadratic
        np.testing.assert_allclose(c, 2 * g.coords()[0] - 1, atol=1e-12)
        with pytest.raises(ValueError):
            convection_matrix(E, "downwind")


class TestNorms:
    def test_lebesgue_examples(self):
        g = Grid.interval(0, 1, 200)
        one = ScalarField.from_function(g, lambda x: 1 + 0 * x)
        assert abs(lebesgue_norm(one, 2) - 1) <= 1 / 200
        assert lebesgue_norm(ScalarField.zeros(g), 3.0) == 0.0
        x = ScalarField.from_function(g, lambda x: x)
        assert abs(lebesgue_norm(x, 2) - 1 / math.sqrt(3)) <= 1 / 200
        assert lebesgue_norm(x, math.inf) == pytest.approx(199 / 200)
        with pytest.raises(DomainError):
            lebesgue_norm(x, 0.5)

    def test_large_exponent_no_overflow(self):
        g = Grid.interval(0, 1, 16)
        u = ScalarField(g, np.full(15, 1e200))
        assert lebesgue_norm(u, 6) == pytest.approx(1e200 * (15 / 16) ** (1 / 6))

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-1e3, 1e3), st.sampled_from([1.0, 1.5, 2.0, 6.0, math.inf]))
    def test_homogeneity(self, c, p):
        g = Grid.rectangle(0, 1, 0, 1, 6, 5)
        u = ScalarField.from_function(g, lambda x, y: np.sin(5 * x) - y ** 2)
        assert lebesgue_norm(u * c, p) == pytest.approx(abs(c) * lebesgue_norm(u, p), rel=1e-14, abs=1e-300)

    def test_vector_norm_uses_cell_magnitude(self, square16):
        E = VectorField.constant(square16, (3.0, 4.0))
        assert lebesgue_norm(E, 2) == pytest.approx(5.0)

    def test_orlicz_examples(self, square16):
        assert orlicz_nlogn_norm(VectorField.zeros(square16), 3) == 0.0
        unit = VectorField.constant(square16, (0.6, 0.8))
        assert orlicz_nlogn_norm(unit, 3) == pytest.approx(math.log(math.e + 1), abs=1e-12)
        with pytest.raises(DomainError):
            orlicz_nlogn_norm(unit, 2)

    def test_orlicz_singular_field_against_polar_oracle(self):
        g = Grid.rectangle(0, 1, 0, 1, 256, 256)

        def E(x, y):
            r = np.maximum(np.hypot(x, y), 1e-300)
            return x / r ** 1.2, y / r ** 1.2

        got = orlicz_nlogn_norm(VectorField.from_function(g, E), 3)
        # polar coordinates over the triangle 0 < phi < pi/4, doubled; r = t^5 smooths the origin
        def inner(phi):
            top = (1 / math.cos(phi)) ** 0.2
            fn = lambda t: 5 * t ** 6 * np.log(math.e + 1 / np.maximum(t, 1e-300)) ** 3  # noqa: E731
            return simpson(fn, 0.0, top, 1000)

        phis = np.linspace(0, math.pi / 4, 1001)
        vals = np.array([inner(p) for p in phis])
        h = phis[1] - phis[0]
        outer = h / 3 * (vals[0] + vals[-1] + 4 * vals[1:-1:2].sum() + 2 * vals[2:-1:2].sum())
        oracle = (2 * outer) ** (1 / 3)
        assert abs(got - oracle) <= 1e-4


class TestLevelSets:
    def test_examples(self):
        g = Grid.interval(0, 1, 100)
        x = ScalarField.from_function(g, lambda x: x)
        assert levelset_measure(x, 2.0) == 0.0
        assert abs(levelset_measure(x, 0.5) - 0.5) <= 0.01 + 1e-12
        c = ScalarField.from_function(g, lambda x: -3 + 0 * x)
        assert abs(levelset_measure(c, 1.0) - 1.0) <= 0.01 + 1e-12
        with pytest.raises(DomainError):
            levelset_measure(c, -1.0)

    def test_nonincreasing(self):
        rng = np.random.default_rng(5)
        g = Grid.rectangle(0, 1, 0, 1, 10, 10)
        u = ScalarField(g, rng.normal(size=g.interior_shape))
        ks = np.linspace(0, 4, 200)
        m = [levelset_measure(u, k) for k in ks]
        assert np.all(np.diff(m) <= 0)

    def test_truncation(self):
        g = Grid.interval(0, 1, 8)
        t, r = truncate(ScalarField(g, np.full(7, 3.0)), 5)
        assert np.all(t.values == 3) and np.all(r.values == 0)
        t, r = truncate(ScalarField(g, np.full(7, -7.0)), 5)
        assert np.all(t.values == -5) and np.all(r.values == -2)
        rng = np.random.default_rng(2)
        u = ScalarField(g, rng.normal(scale=10, size=7))
        t, r = truncate(u, 2.5)
        assert np.array_equal(t.values + r.values, u.values)
        with pytest.raises(DomainError):
            truncate(u, 0)


class TestConstants:
    def test_talenti(self):
        for N, ref in TALENTI.items():
            assert sobolev_constant(N) == pytest.approx(ref, rel=1e-14)

    def test_override_and_domain(self):
        assert sobolev_constant(3, 1.0) == 1.0
        with pytest.raises(DomainError):
            sobolev_constant(2)
        with pytest.raises(DomainError):
            sobolev_constant(3, -1.0)

    def test_exponents(self):
        assert critical_exponents(3) == (6.0, 1.2)
        assert critical_exponents(4) == (4.0, 4 / 3)


class TestFields:
    def test_arithmetic_and_validation(self):
        g = Grid.interval(0, 1, 8)
        a = ScalarField.from_function(g, lambda x: x)
        b = a + a - a * 0.5
        np.testing.assert_allclose(b.values, 1.5 * a.values)
        with pytest.raises(ValueError):
            ScalarField(g, np.full(7, np.nan))
        with pytest.raises(ValueError):
            VectorField(g, (np.full(8, np.inf),))

    def test_clip(self):
        g = Grid.rectangle(0, 1, 0, 1, 4, 4)
        E = VectorField.constant(g, (5.0, -7.0)).clip(3.0)
        assert np.all(E.components[0] == 3.0) and np.all(E.components[1] == -3.0)

    def test_vector_from_function_uses_face_locations(self):
        g = Grid.rectangle(0, 1, 0, 2, 4, 4)
        E = VectorField.from_function(g, lambda x, y: (x, y))
        xs = E.components[0][:, 0]
        np.testing.assert_allclose(xs, [0.125, 0.375, 0.625, 0.875])
        np.testing.assert_allclose(E.components[1][0, :], [0.25, 0.75, 1.25, 1.75])
