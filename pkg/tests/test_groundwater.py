"""Random-field and flow-solver tests.

Oracles: the analytic eigenseries of the homogeneous 1-D Dirichlet strip
(independent of the FV solver), direct covariance-kernel evaluation for the
KLE, ensemble statistics for the sampler, and the diffusion time-scaling
symmetry for conductivity changes.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from lagdeconv.groundwater import (
    CovarianceConfig,
    DomainConfig,
    FieldRealization,
    ImpulseResponse,
    KLEBasis,
    export_field_csv,
    greens_coeffs,
    homogeneous_peak_time,
    kle_build,
    sample_field,
    simulate_impulse,
    strip_impulse_response,
)
from lagdeconv.laguerre import LaguerreBasis, TimeSeries, synthesize

DESK = DomainConfig(nx=50, ny=20, dt=0.1, t_end=300.0)
SMALL = DomainConfig(nx=30, ny=12, dt=0.1, t_end=250.0)


@pytest.fixture(scope="module")
def default_basis():
    return kle_build(CovarianceConfig(), DomainConfig())


@pytest.fixture(scope="module")
def desk_homogeneous():
    return simulate_impulse(None, DESK)


class TestConfigs:
    def test_domain_validation(self):
        with pytest.raises(ValueError):
            DomainConfig(probe=(11.0, 2.0))
        with pytest.raises(ValueError):
            DomainConfig(probe=(4.0, 0.0))
        with pytest.raises(ValueError):
            DomainConfig(nx=3)
        with pytest.raises(ValueError):
            DomainConfig(dt=0.0)
        with pytest.raises(ValueError):
            DomainConfig(dt=1.0, t_end=0.5)
        with pytest.raises(ValueError):
            DomainConfig(length_x=-1.0)

    def test_covariance_validation(self):
        with pytest.raises(ValueError):
            CovarianceConfig(variance=-0.1)
        with pytest.raises(ValueError):
            CovarianceConfig(eta1=0.0)
        with pytest.raises(ValueError):
            CovarianceConfig(n_terms=0)
        assert CovarianceConfig(variance=0.0).variance == 0.0  # degenerate case allowed


class TestKLE:
    def test_eigenvalues_strictly_decreasing(self, default_basis):
        assert np.all(np.diff(default_basis.eigenvalues) < 0)
        assert np.all(default_basis.eigenvalues > 0)

    def test_truncation_energy_bounded(self, default_basis):
        cov, dom = CovarianceConfig(), DomainConfig()
        total = cov.variance * dom.length_x * dom.length_y
        retained = default_basis.eigenvalues.sum()
        assert retained <= total
        # the leading 100 modes should carry most of the variance
        assert retained / total > 0.9

    def test_orthonormal_on_resolving_grid(self, default_basis):
        assert default_basis.gram_defect < 1e-3

    def test_coarse_grid_defect_surfaced(self):
        # the desk grid cannot resolve the highest of 100 tensor modes; the
        # basis still builds but reports the Gram deviation honestly
        basis = kle_build(CovarianceConfig(), DESK)
        assert basis.gram_defect > 1e-3
        assert basis.n_modes == 100

    def test_covariance_reconstruction(self, default_basis):
        cov, dom = CovarianceConfig(), DomainConfig()
        xc, yc = dom.cell_centers()
        lam, funcs = default_basis.eigenvalues, default_basis.eigenfunctions
        p = (39, 19)  # cell whose center is nearest the probe (4, 2)
        for q in [(49, 19), (39, 29), (44, 24), (59, 19), (39, 24), (44, 19)]:
            recon = np.sum(lam * funcs[:, p[1], p[0]] * funcs[:, q[1], q[0]])
            dx = abs(xc[p[0]] - xc[q[0]])
            dy = abs(yc[p[1]] - yc[q[1]])
            assert np.hypot(dx, dy) >= 0.5
            kernel = cov.variance * np.exp(-dx / cov.eta1 - dy / cov.eta2)
            assert recon == pytest.approx(kernel, rel=0.05)

    def test_modes_accessor(self, default_basis):
        modes = default_basis.modes
        assert len(modes) == 100
        lam0, f0 = modes[0]
        assert lam0 == default_basis.eigenvalues[0]
        assert f0.shape == (40, 100)

    def test_zero_variance_rejected(self):
        with pytest.raises(ValueError):
            kle_build(CovarianceConfig(variance=0.0), SMALL)

    def test_basis_type_validation(self):
        with pytest.raises(ValueError):
            KLEBasis(eigenvalues=np.array([1.0, 2.0]),  # increasing
                     eigenfunctions=np.zeros((2, 4, 4)), cell_area=1.0)
        with pytest.raises(ValueError):
            KLEBasis(eigenvalues=np.array([1.0, -0.5]),
                     eigenfunctions=np.zeros((2, 4, 4)), cell_area=1.0)


class TestSampleField:
    def test_seed_determinism(self):
        basis = kle_build(CovarianceConfig(n_terms=12), SMALL)
        f1 = sample_field(basis, 42)
        f2 = sample_field(basis, 42)
        assert np.array_equal(f1.logK, f2.logK)
        assert np.array_equal(f1.xi, f2.xi)
        f3 = sample_field(basis, 43)
        assert not np.array_equal(f1.logK, f3.logK)

    def test_zero_weights_hook(self):
        basis = kle_build(CovarianceConfig(n_terms=12), SMALL)
        f = sample_field(basis, 7, zero_weights=True)
        assert np.all(f.logK == 0.0)
        assert np.all(f.conductivity == 1.0)

    def test_ensemble_variance(self):
        # empirical variance over 2000 draws vs the Mercer partial sum and
        # the retained-energy fraction (area averages)
        cov = CovarianceConfig(n_terms=40)
        basis = kle_build(cov, DESK)
        draws = np.array([sample_field(basis, s).logK for s in range(2000)])
        emp = draws.var(axis=0)
        theo = np.tensordot(basis.eigenvalues, basis.eigenfunctions**2, axes=(0, 0))
        assert emp.mean() == pytest.approx(theo.mean(), rel=0.03)
        frac = basis.eigenvalues.sum() / (cov.variance * 10.0 * 4.0)
        assert emp.mean() == pytest.approx(cov.variance * frac, rel=0.03)
        assert np.mean(draws) == pytest.approx(0.0, abs=0.05)

    def test_field_validation(self):
        with pytest.raises(ValueError):
            FieldRealization(xi=np.zeros(2), logK=np.zeros(4), seed=0)
        with pytest.raises(ValueError):
            FieldRealization(xi=np.zeros(2), logK=np.full((2, 2), np.nan), seed=0)


class TestSimulate:
    def test_matches_analytic_strip(self, desk_homogeneous):
        # uniform K makes the 2-D problem y-independent; the 1-D Dirichlet
        # eigenseries is an exact reference (desk grid lands near 3%)
        t = desk_homogeneous.series.times
        ref = strip_impulse_response(4.0, 10.0, 1.0, t)
        num = desk_homogeneous.series.values
        rel = np.sqrt(np.trapezoid((num - ref) ** 2, t) / np.trapezoid(ref**2, t))
        assert rel < 0.05

    def test_nonnegative_and_unimodal(self, desk_homogeneous):
        v = desk_homogeneous.series.values
        assert v.min() >= -1e-12
        pk = int(np.argmax(v))
        assert np.all(np.diff(v[: pk + 1]) >= -1e-12)
        assert np.all(np.diff(v[pk:]) <= 1e-12)
        assert desk_homogeneous.peak_time > 0

    def test_mass_balance_audit(self, desk_homogeneous):
        assert desk_homogeneous.meta["mass_defect"] < 1e-8

    def test_zero_input_gives_zero_response(self):
        resp = simulate_impulse(None, SMALL, pulse_area=0.0)
        assert np.all(resp.series.values == 0.0)

    def test_response_linear_in_pulse_area(self):
        r1 = simulate_impulse(None, SMALL)
        r3 = simulate_impulse(None, SMALL, pulse_area=3.0)
        assert_allclose(r3.series.values, 3.0 * r1.series.values, rtol=1e-12, atol=1e-15)

    def test_homogeneous_limit_bit_for_bit(self):
        basis = kle_build(CovarianceConfig(n_terms=12), SMALL)
        from_hook = simulate_impulse(sample_field(basis, 0, zero_weights=True), SMALL)
        dedicated = simulate_impulse(None, SMALL)
        assert np.array_equal(from_hook.series.values, dedicated.series.values)

    def test_conductivity_time_scaling(self):
        # K -> 2K with dt -> dt/2 rescales the discrete system exactly:
        # response values map as b(t) -> 2 b(2t) sample for sample
        slow = simulate_impulse(None, DomainConfig(nx=30, ny=12, dt=0.1, t_end=300.0))
        field = FieldRealization(xi=np.zeros(1), logK=np.full((12, 30), np.log(2.0)), seed=0)
        fast = simulate_impulse(field, DomainConfig(nx=30, ny=12, dt=0.05, t_end=150.0))
        mapped = 2.0 * slow.series.values  # slow sample k is fast time k*dt/... same index
        assert fast.series.values.size == mapped.size
        scale = np.max(np.abs(mapped))
        assert np.max(np.abs(fast.series.values - mapped)) < 1e-10 * scale
        assert fast.peak_time == pytest.approx(slow.peak_time / 2.0, rel=1e-12)

    def test_conductivity_time_scaling_same_grid(self):
        # on a shared grid the mapping holds to within the pulse-width error
        slow = simulate_impulse(None, DomainConfig(nx=30, ny=12, dt=0.1, t_end=300.0))
        field = FieldRealization(xi=np.zeros(1), logK=np.full((12, 30), np.log(2.0)), seed=0)
        fast = simulate_impulse(field, DomainConfig(nx=30, ny=12, dt=0.1, t_end=150.0))
        mapped = 2.0 * slow.series.values[::2]
        t = fast.series.times
        rel = np.sqrt(np.trapezoid((fast.series.values - mapped) ** 2, t)
                      / np.trapezoid(mapped**2, t))
        assert rel < 0.05

    def test_dt_warning(self):
        coarse = DomainConfig(nx=30, ny=12, dt=0.5, t_end=100.0)
        with pytest.warns(UserWarning, match="coarse"):
            resp = simulate_impulse(None, coarse)
        assert resp.meta["dt_warning"] is True

    def test_grid_mismatch_rejected(self):
        field = FieldRealization(xi=np.zeros(1), logK=np.zeros((4, 4)), seed=0)
        with pytest.raises(ValueError):
            simulate_impulse(field, SMALL)

    def test_reference_peak_time(self):
        # analytic argmax for the default domain, frozen regression band
        assert 2.5 < homogeneous_peak_time(DomainConfig()) < 2.9

    def test_impulse_response_validation(self):
        s = TimeSeries(times=[0.0, 1.0, 2.0], values=[0.0, 1.0, 0.5])
        with pytest.raises(ValueError):
            ImpulseResponse(series=s, peak_time=2.0, meta={})


class TestGreensCoeffs:
    def test_synthetic_basis_member(self):
        T = 10.0
        t = np.linspace(0.0, 10 * T, 4001)
        resp = ImpulseResponse(
            series=TimeSeries(times=t, values=np.exp(-t / (2 * T))),
            peak_time=0.0, meta={})
        b = greens_coeffs(resp, LaguerreBasis(n_terms=5, scale=T))
        expected = np.zeros(5)
        expected[0] = 1.0
        assert_allclose(b.coeffs, expected, atol=2e-3)

    def test_undecayed_response_rejected(self):
        t = np.linspace(0.0, 10.0, 101)
        resp = ImpulseResponse(
            series=TimeSeries(times=t, values=np.exp(-t / 100.0)),
            peak_time=0.0, meta={})
        with pytest.raises(RuntimeError, match="decayed"):
            greens_coeffs(resp, LaguerreBasis(n_terms=5, scale=1.0))

    def test_resynthesis_front_resolution_limit(self, desk_homogeneous):
        # the sharp early-time front sits at the resolution limit of a
        # 50-term expansion at T=100: the coefficients are quadrature-exact
        # (see the closed-form tests) but re-synthesis carries a ~35%
        # truncation residual; frozen here as a regression band
        b = greens_coeffs(desk_homogeneous, LaguerreBasis(n_terms=50, scale=100.0))
        t = desk_homogeneous.series.times
        resyn = synthesize(b, t)
        v = desk_homogeneous.series.values
        rel = np.sqrt(np.trapezoid((v - resyn) ** 2, t) / np.trapezoid(v**2, t))
        assert 0.30 < rel < 0.40
        # slow coefficient decay is the signature of the unresolved front
        assert abs(b.coeffs[49] / b.coeffs[0]) > 0.05

    def test_b0_stable_under_refinement(self, desk_homogeneous):
        basis = LaguerreBasis(n_terms=8, scale=100.0)
        b_coarse = greens_coeffs(desk_homogeneous, basis)
        fine = simulate_impulse(None, DomainConfig(nx=100, ny=40, dt=0.1, t_end=300.0))
        b_fine = greens_coeffs(fine, basis)
        assert b_fine.coeffs[0] == pytest.approx(b_coarse.coeffs[0], rel=0.01)


class TestStripResponse:
    def test_time_integral_is_steady_profile(self):
        # int_0^inf b(x, t) dt = 1 - x/L, term-by-term integration
        L, D = 10.0, 1.0
        for x in (2.0, 4.0, 7.0):
            t = np.linspace(0.0, 400.0, 40001)
            total = np.trapezoid(strip_impulse_response(x, L, D, t), t)
            assert total == pytest.approx(1.0 - x / L, rel=1e-4)

    def test_zero_at_time_zero(self):
        assert strip_impulse_response(4.0, 10.0, 1.0, 0.0) == 0.0

    def test_scalar_and_array_forms(self):
        v = strip_impulse_response(4.0, 10.0, 1.0, 2.5)
        arr = strip_impulse_response(4.0, 10.0, 1.0, np.array([2.5]))
        assert isinstance(v, float)
        assert arr.shape == (1,)
        assert v == arr[0]


class TestExport:
    def test_field_csv(self, tmp_path):
        basis = kle_build(CovarianceConfig(n_terms=12), SMALL)
        field = sample_field(basis, 5)
        path = tmp_path / "field.csv"
        export_field_csv(field, SMALL, path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "x,y,value"
        assert len(lines) == 1 + SMALL.nx * SMALL.ny
        x, y, v = (float(s) for s in lines[1].split(","))
        xc, yc = SMALL.cell_centers()
        assert (x, y) == (xc[0], yc[0])
        assert v == field.logK[0, 0]  # 17 significant digits round-trip exactly
