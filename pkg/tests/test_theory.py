"""Distribution laws, noncentrality fields, and the clairvoyant statistic."""

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.stats import ncx2

from trimaging.errors import SeriesNonConvergence, UnsupportedStatistic
from trimaging.forward import ScattererSet
from trimaging.imaging import ImageGridSpec, XiVector
from trimaging.scene import Position2D, default_layout, default_plan
from trimaging.theory import (
    ComplexChiSquareLaw,
    ComplexFLaw,
    cchi2_cdf,
    cchi2_pdf,
    cchi2_sample,
    cf_cdf,
    cf_pdf,
    cf_sample,
    mpi_stat,
    noncentrality_explicit,
    noncentrality_field,
    noncentrality_projection,
    predict_stat_law,
    snr_vector,
    stat_law_from_deltas,
)
from trimaging.validate import ks_critical, ks_distance

PAPER_NOISE = (10 ** (-15 / 10), 10 ** (-5 / 10), 10 ** (-15 / 10))


def paper_scene(n_freq=3):
    return ScattererSet.from_constant_tau(
        (Position2D(-1.0, -6.0), Position2D(1.0, -6.0)), [3.0, 4.0], n_freq
    )


# ---------------------------------------------------------------------------
# complex chi-square


def test_cchi2_central_unit_is_exponential():
    law = ComplexChiSquareLaw(1)
    xs = np.linspace(0.0, 8.0, 50)
    assert np.allclose(cchi2_pdf(law, xs), np.exp(-xs), rtol=1e-12)
    assert np.allclose(cchi2_cdf(law, xs), 1.0 - np.exp(-xs), rtol=1e-12)


def test_cchi2_sampler_mean():
    rng = np.random.default_rng(61)
    for dof, delta, scale in ((1, 0.0, 1.0), (3, 4.0, 2.0), (186, 0.0, 0.5)):
        law = ComplexChiSquareLaw(dof, delta, scale)
        draws = cchi2_sample(law, rng, 100_000)
        se = draws.std() / np.sqrt(draws.size)
        assert abs(draws.mean() - law.mean) <= 4 * se


def test_cchi2_pdf_integrates_to_one():
    for dof, delta, scale in ((1, 0.0, 1.0), (4, 7.0, 0.3), (12, 2.5, 2.0)):
        law = ComplexChiSquareLaw(dof, delta, scale)
        hi = brentq(lambda x: cchi2_cdf(law, x) - (1 - 1e-9), 1e-12, 1e6)
        total, err = quad(lambda x: float(cchi2_pdf(law, x)), 0, hi, limit=200)
        assert abs(total - 1.0) <= 1e-6 + err


def test_cchi2_matches_real_chi_square_reparameterization():
    # 2X/a follows a real noncentral chi-square with doubled dof and nc
    law = ComplexChiSquareLaw(5, 3.0, 1.7)
    xs = np.linspace(0.05, 40.0, 40)
    ours = cchi2_cdf(law, xs)
    ref = ncx2.cdf(2 * xs / law.scale, df=2 * law.dof, nc=2 * law.noncentrality)
    assert np.allclose(ours, ref, atol=1e-10)
    ours_pdf = cchi2_pdf(law, xs)
    ref_pdf = 2 / law.scale * ncx2.pdf(2 * xs / law.scale, 2 * law.dof, 2 * law.noncentrality)
    assert np.allclose(ours_pdf, ref_pdf, rtol=1e-9)


# ---------------------------------------------------------------------------
# complex F


def test_cf_central_pdf_closed_form():
    m = 9
    law = ComplexFLaw(1, m)
    xs = np.linspace(0.0, 5.0, 60)
    assert np.allclose(cf_pdf(law, xs), m / (1 + xs) ** (m + 1), rtol=1e-10)
    assert np.allclose(cf_cdf(law, xs), 1 - (1 + xs) ** (-m), rtol=1e-10)


def test_cf_sampler_mean_central():
    # ratio of independent unit-scale laws: mean 1/(M-1)
    rng = np.random.default_rng(62)
    m = 11
    draws = cf_sample(ComplexFLaw(1, m), rng, 100_000)
    se = draws.std() / np.sqrt(draws.size)
    assert abs(draws.mean() - 1.0 / (m - 1)) <= 4 * se


def test_cf_doubly_reduces_to_singly():
    xs = np.linspace(0.01, 6.0, 40)
    doubly = cf_pdf(ComplexFLaw(2, 10, 5.0, 0.0), xs)
    # hand-rolled singly-noncentral density: Poisson mixture of beta primes
    from scipy.special import betaln
    from scipy.stats import poisson as pois

    ks = np.arange(0, 60)
    w = pois.pmf(ks, 5.0)
    singly = np.zeros_like(xs)
    for k, wk in zip(ks, w):
        a, b = 2 + k, 10
        singly += wk * np.exp(
            -betaln(a, b) + (a - 1) * np.log(xs) - (a + b) * np.log1p(xs)
        )
    assert np.allclose(doubly, singly, atol=1e-10)


@pytest.mark.parametrize("delta_n", [0.0, 5.0, 20.0])
@pytest.mark.parametrize("delta_d", [0.0, 5.0, 20.0])
def test_cf_sampler_agrees_with_series_cdf(delta_n, delta_d):
    rng = np.random.default_rng(int(63 + delta_n * 10 + delta_d))
    law = ComplexFLaw(1, 12, delta_n, delta_d)
    n = 10_000
    draws = cf_sample(law, rng, n)
    d = ks_distance(draws, lambda x: cf_cdf(law, x))
    assert d < ks_critical(n), f"KS {d:.4f} for ({delta_n}, {delta_d})"


def test_cf_cdf_monotone_and_bounded():
    law = ComplexFLaw(1, 186, 11.4, 20.8)
    xs = np.linspace(0.0, 2.0, 500)
    cdf = cf_cdf(law, xs)
    assert np.all(np.diff(cdf) >= -1e-12)
    assert cdf[0] >= 0.0 and cdf[-1] <= 1.0
    # matches numeric integration of the density
    mid, err = quad(lambda x: float(cf_pdf(law, x)), 0, 0.5, limit=200)
    assert abs(mid - float(cf_cdf(law, 0.5))) <= 1e-6 + err


def test_series_cap_raises():
    with pytest.raises(SeriesNonConvergence):
        cf_cdf(ComplexFLaw(1, 10, 1e9, 0.0), np.array([1.0]))


# ---------------------------------------------------------------------------
# noncentrality parameters


def test_noncentrality_matched_single_scatterer():
    layout = default_layout()
    plan = default_plan()
    pos = Position2D(-1.0, -6.0)
    tau = 2.0 - 1.0j
    sc = ScattererSet.from_constant_tau((pos,), [tau], plan.n_freq)
    dn, dd = noncentrality_explicit(sc, layout, plan, "BA", PAPER_NOISE, pos)
    snr = snr_vector(layout, plan, pos, [tau] * 3, PAPER_NOISE)
    assert np.allclose(dn, snr.delta_sq, rtol=1e-10)
    assert np.allclose(dd, 0.0, atol=1e-9)


def test_noncentrality_zero_tau():
    layout = default_layout()
    plan = default_plan()
    sc = ScattererSet.from_constant_tau(
        (Position2D(-1.0, -6.0), Position2D(1.0, -6.0)), [0.0, 0.0], plan.n_freq
    )
    dn, dd = noncentrality_explicit(sc, layout, plan, "BA", PAPER_NOISE, Position2D(0, -5))
    assert np.allclose(dn, 0.0) and np.allclose(dd, 0.0)


def _random_scene(rng, n_scat, n_freq):
    while True:
        pts = [
            Position2D(float(rng.uniform(-3, 3)), float(rng.uniform(-8, -4)))
            for _ in range(n_scat)
        ]
        if all(
            pts[i].distance_to(pts[j]) > 0.3
            for i in range(n_scat)
            for j in range(i + 1, n_scat)
        ):
            break
    tau = rng.uniform(0.5, 4.0, (n_freq, n_scat)) + 1j * rng.uniform(
        -2.0, 2.0, (n_freq, n_scat)
    )
    return ScattererSet(tuple(pts), tau)


def test_projection_and_explicit_routes_agree():
    layout = default_layout()
    rng = np.random.default_rng(64)
    checked = 0
    for model in ("BA", "FL"):
        for n_scat in (1, 2, 3):
            for wavelengths in ((1.0,), (1.0, 0.5, 1.0 / 3.0)):
                from trimaging.scene import FrequencyPlan

                plan = FrequencyPlan.from_wavelengths(wavelengths)
                for _ in range(5):
                    sc = _random_scene(rng, n_scat, plan.n_freq)
                    nv = rng.uniform(0.05, 2.0, plan.n_freq)
                    probe = Position2D(
                        float(rng.uniform(-3, 3)), float(rng.uniform(-8, -4))
                    )
                    dn1, dd1 = noncentrality_projection(
                        sc, layout, plan, model, nv, probe
                    )
                    dn2, dd2 = noncentrality_explicit(
                        sc, layout, plan, model, nv, probe
                    )
                    assert np.allclose(dn1, dn2, rtol=1e-9)
                    assert np.allclose(dd1, dd2, rtol=1e-9, atol=1e-12)
                    total = dn1 + dd1
                    for ell, kappa in enumerate(plan.wavenumbers):
                        from trimaging.forward import scattering_matrix
                        from trimaging.scene import array_matrices

                        a_t, a_r = array_matrices(layout, sc.positions, kappa)
                        m = scattering_matrix(sc, ell, kappa, model)
                        ref = np.linalg.norm(a_r @ m @ a_t.T, "fro") ** 2 / nv[ell]
                        assert total[ell] == pytest.approx(ref, rel=1e-10)
                    checked += 1
    assert checked >= 50


def test_noncentrality_far_probe_captures_nothing():
    layout = default_layout()
    plan = default_plan()
    sc = paper_scene()
    far = Position2D(300.0, -300.0)
    dn, dd = noncentrality_explicit(sc, layout, plan, "BA", PAPER_NOISE, far)
    total = dn + dd
    assert np.all(dn <= 0.05 * total)
    assert np.all(dd >= 0.95 * total)


def test_noncentrality_field_structure():
    layout = default_layout()
    plan = default_plan()
    sc = paper_scene()
    grid = ImageGridSpec(-2.0, 2.0, -7.0, -5.0, 0.25)
    fld_ba = noncentrality_field(sc, layout, plan, "BA", PAPER_NOISE, grid)
    # the captured-energy field dominates neighbors at the scatterer cells
    xs = list(grid.x_coords())
    ys = list(grid.y_coords())
    wideband = fld_ba.delta_n.sum(axis=0)
    for x_true in (-1.0, 1.0):
        j, i = ys.index(-6.0), xs.index(x_true)
        patch = wideband[j - 2 : j + 3, i - 2 : i + 3]
        assert wideband[j, i] == patch.max()
    # per-cell split is consistent with the cell-independent total
    for ell in range(plan.n_freq):
        s = fld_ba.delta_n[ell] + fld_ba.delta_d[ell]
        assert np.allclose(s, fld_ba.total[ell], rtol=1e-9)
    # multiple scattering changes the field
    fld_fl = noncentrality_field(sc, layout, plan, "FL", PAPER_NOISE, grid)
    rel = np.max(
        np.abs(fld_fl.delta_n - fld_ba.delta_n) / np.maximum(fld_ba.delta_n, 1e-12)
    )
    assert rel > 1e-3


def test_noncentrality_field_zero_tau():
    layout = default_layout()
    plan = default_plan()
    sc = ScattererSet.from_constant_tau(
        (Position2D(-1.0, -6.0), Position2D(1.0, -6.0)), [0.0, 0.0], plan.n_freq
    )
    grid = ImageGridSpec(-1.0, 1.0, -7.0, -5.0, 0.5)
    fld = noncentrality_field(sc, layout, plan, "BA", PAPER_NOISE, grid)
    assert np.all(fld.delta_n == 0.0)
    assert np.all(fld.delta_d == 0.0)


# ---------------------------------------------------------------------------
# per-statistic laws


def test_predict_stat_law_forms():
    layout = default_layout()
    plan = default_plan()
    sc = paper_scene()
    grid = ImageGridSpec(-1.5, -0.5, -6.5, -5.5, 0.5)
    fld = noncentrality_field(sc, layout, plan, "BA", PAPER_NOISE, grid)
    cell = (1, 1)  # (-1, -6)
    law_mf = predict_stat_law("mf", fld, cell, PAPER_NOISE, freq_index=0)
    assert isinstance(law_mf, ComplexChiSquareLaw)
    assert law_mf.dof == 1
    assert law_mf.noncentrality == pytest.approx(fld.delta_n[0, 1, 1])
    assert law_mf.scale == pytest.approx(PAPER_NOISE[0] * fld.b_norm_sq[0, 1, 1])
    law_ml = predict_stat_law("ml", fld, cell, PAPER_NOISE, freq_index=0)
    assert law_ml.scale == pytest.approx(PAPER_NOISE[0] / fld.b_norm_sq[0, 1, 1])
    law_xi = predict_stat_law("xi", fld, cell, PAPER_NOISE, freq_index=1)
    assert isinstance(law_xi, ComplexFLaw)
    assert (law_xi.dof_num, law_xi.dof_den) == (1, 186)
    law_na = predict_stat_law("na", fld, cell, PAPER_NOISE)
    assert law_na.dof == plan.n_freq
    assert law_na.scale == 1.0
    assert law_na.noncentrality == pytest.approx(float(fld.delta_n[:, 1, 1].sum()))
    law_li = predict_stat_law("li", fld, cell, PAPER_NOISE)
    assert [l.dof for l in law_li] == [186, 186, 186]
    with pytest.raises(UnsupportedStatistic):
        predict_stat_law("glr", fld, cell, PAPER_NOISE)


def test_stat_law_zero_scene_is_central():
    law = stat_law_from_deltas("xi", [0.0], [0.0], [0.3], [1.0], 187, 0)
    assert law.noncentrality_num == 0.0
    assert law.noncentrality_den == 0.0
    assert (law.dof_num, law.dof_den) == (1, 186)


def test_na_law_single_frequency():
    law = stat_law_from_deltas("na", [7.5], [3.0], [0.5], [1.0], 187, None)
    assert law.dof == 1 and law.scale == 1.0
    assert law.noncentrality == 7.5


# ---------------------------------------------------------------------------
# clairvoyant benchmark


def test_mpi_unit_at_zero_snr():
    snr = __import__("trimaging").SnrVector((0.0, 0.0))
    assert mpi_stat(XiVector((0.3, 2.0)), snr, 186) == pytest.approx(1.0)


def test_mpi_monotone_in_each_ratio():
    from trimaging import SnrVector

    snr = SnrVector((6.0, 15.0))
    grid = np.linspace(0.01, 3.0, 25)
    for coord in range(2):
        prev = -np.inf
        for v in grid:
            point = [0.4, 0.4]
            point[coord] = v
            val = mpi_stat(XiVector(tuple(point)), snr, 40)
            assert val > prev
            prev = val


def test_mpi_ranks_like_xi_single_frequency():
    from trimaging import SnrVector

    rng = np.random.default_rng(65)
    snr = SnrVector((30.0,))
    draws = cf_sample(ComplexFLaw(1, 40, 10.0, 0.0), rng, 200)
    vals = np.array([mpi_stat(XiVector((float(v),)), snr, 40) for v in draws])
    assert np.array_equal(np.argsort(vals), np.argsort(draws))
