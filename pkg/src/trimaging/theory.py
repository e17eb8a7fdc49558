"""Exact distributional machinery for the imaging statistics.

Complex chi-square and complex F laws are parameterized in "complex degrees
of freedom": a complex chi-square with N dof is the law of
a * sum_{n=1..N} |z_n + mu_n|^2 with z_n i.i.d. standard circular complex
Gaussian and noncentrality delta = sum |mu_n|^2, so its mean is a*(N+delta).
The complex F used here is the *raw ratio* U/V of two independent complex
chi-squares (no dof normalization), matching the definition of the
projected-to-residual energy ratio it describes.

Noncentral laws are evaluated as Poisson(delta) mixtures truncated where the
cumulative tail weight drops below 1e-12; samplers use the defining Gaussian
construction so that sampler and series act as independent cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betainc, betaln, gammainc, gammaln, logsumexp
from scipy.stats import poisson

from .errors import SeriesNonConvergence, UnsupportedStatistic
from .forward import ScattererSet, scattering_matrix, vectorize
from .imaging import ELEMENT_EXCLUSION, ImageGridSpec
from .scene import ArrayLayout, FrequencyPlan, Position2D, array_matrices, element_distances, steering, steering_many

_TAIL_WEIGHT = 1e-12
_MAX_TERMS = 100_000


@dataclass(frozen=True)
class ComplexChiSquareLaw:
    """Scaled (non)central complex chi-square."""

    dof: int
    noncentrality: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if self.dof < 1:
            raise ValueError("dof must be a positive integer")
        if self.noncentrality < 0 or self.scale <= 0:
            raise ValueError("need noncentrality >= 0 and scale > 0")

    @property
    def mean(self) -> float:
        return self.scale * (self.dof + self.noncentrality)


@dataclass(frozen=True)
class ComplexFLaw:
    """Raw ratio of independent complex chi-squares, possibly noncentral in
    numerator and/or denominator."""

    dof_num: int
    dof_den: int
    noncentrality_num: float = 0.0
    noncentrality_den: float = 0.0

    def __post_init__(self):
        if self.dof_num < 1 or self.dof_den < 1:
            raise ValueError("dofs must be positive integers")
        if self.noncentrality_num < 0 or self.noncentrality_den < 0:
            raise ValueError("noncentralities must be nonnegative")


def _poisson_window(delta: float):
    """Index range and weights covering all but ~1e-12 Poisson tail mass."""
    if delta < 0:
        raise ValueError("noncentrality must be nonnegative")
    if delta == 0.0:
        return 0, np.ones(1)
    lo = int(poisson.ppf(_TAIL_WEIGHT, delta))
    hi = int(poisson.isf(_TAIL_WEIGHT, delta)) + 1
    if hi - lo + 1 > _MAX_TERMS:
        raise SeriesNonConvergence(
            f"Poisson mixture needs {hi - lo + 1} terms (noncentrality {delta:.3g})"
        )
    ks = np.arange(lo, hi + 1)
    logw = ks * np.log(delta) - delta - gammaln(ks + 1)
    return lo, np.exp(logw)


# ---------------------------------------------------------------------------
# complex chi-square


def cchi2_pdf(law: ComplexChiSquareLaw, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    z = x / law.scale
    k0, w = _poisson_window(law.noncentrality)
    out = np.zeros_like(z)
    pos = z > 0
    with np.errstate(divide="ignore"):
        logz = np.where(pos, np.log(np.where(pos, z, 1.0)), 0.0)
    for i, wk in enumerate(w):
        n = law.dof + k0 + i
        term = np.zeros_like(z)
        term[pos] = np.exp((n - 1) * logz[pos] - z[pos] - gammaln(n))
        if n == 1:
            term[~pos & (z == 0)] = 1.0
        out += wk * term
    return out / law.scale


def cchi2_cdf(law: ComplexChiSquareLaw, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    z = np.maximum(x / law.scale, 0.0)
    k0, w = _poisson_window(law.noncentrality)
    out = np.zeros_like(z)
    for i, wk in enumerate(w):
        out += wk * gammainc(law.dof + k0 + i, z)
    return np.clip(out, 0.0, 1.0)


def cchi2_sample(law: ComplexChiSquareLaw, rng: np.random.Generator, size: int = 1):
    """Draws via the defining construction (2*dof real Gaussians each)."""
    mu = np.sqrt(law.noncentrality)
    out = np.empty(size)
    chunk = max(1, int(4_000_000 // (2 * law.dof)))
    for start in range(0, size, chunk):
        m = min(chunk, size - start)
        g = rng.standard_normal((m, 2 * law.dof)) * np.sqrt(0.5)
        g[:, 0] += mu
        out[start : start + m] = np.einsum("ij,ij->i", g, g)
    return law.scale * out


# ---------------------------------------------------------------------------
# complex F (raw ratio)


def _central_f_logpdf(x_pos: np.ndarray, a: float, b: float) -> np.ndarray:
    return (
        gammaln(a + b)
        - gammaln(a)
        - gammaln(b)
        + (a - 1) * np.log(x_pos)
        - (a + b) * np.log1p(x_pos)
    )


def cf_logpdf(law: ComplexFLaw, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, -np.inf)
    pos = x > 0
    if law.dof_num == 1 and law.noncentrality_num == 0:
        pos = x >= 0  # density finite at the origin for a 1-dof numerator
    xp = np.maximum(x[pos], np.finfo(float).tiny)
    j0_, wj = _poisson_window(law.noncentrality_num)
    k0_, wk = _poisson_window(law.noncentrality_den)
    terms = np.empty((len(wj) * len(wk), xp.size))
    logw = np.empty(len(wj) * len(wk))
    with np.errstate(divide="ignore"):
        lwj = np.log(wj)
        lwk = np.log(wk)
    idx = 0
    for j, lw_j in enumerate(lwj):
        a = law.dof_num + j0_ + j
        for k, lw_k in enumerate(lwk):
            b = law.dof_den + k0_ + k
            terms[idx] = _central_f_logpdf(xp, a, b)
            logw[idx] = lw_j + lw_k
            idx += 1
    out[pos] = logsumexp(terms + logw[:, None], axis=0)
    return out


def cf_pdf(law: ComplexFLaw, x) -> np.ndarray:
    with np.errstate(under="ignore"):
        return np.exp(cf_logpdf(law, x))


def cf_cdf(law: ComplexFLaw, x) -> np.ndarray:
    """Doubly-noncentral cdf via the double Poisson mixture of regularized
    incomplete beta values, using the stable recurrence
    I_u(a+1, b) = I_u(a, b) - u^a (1-u)^b / (a B(a, b)) along the numerator
    index to avoid re-evaluating the beta integral for every term."""
    x = np.asarray(x, dtype=float)
    u = np.clip(x / (1.0 + x), 0.0, 1.0)
    u = np.where(x < 0, 0.0, u)
    j0_, wj = _poisson_window(law.noncentrality_num)
    k0_, wk = _poisson_window(law.noncentrality_den)
    out = np.zeros_like(u)
    with np.errstate(divide="ignore"):
        logu = np.where(u > 0, np.log(np.where(u > 0, u, 1.0)), -np.inf)
        log1mu = np.where(u < 1, np.log1p(-np.where(u < 1, u, 0.0)), -np.inf)
    for k, w_k in enumerate(wk):
        b = law.dof_den + k0_ + k
        a = float(law.dof_num + j0_)
        ival = betainc(a, b, u)
        acc = wj[0] * ival
        if len(wj) > 1:
            with np.errstate(invalid="ignore"):
                corr = np.exp(a * logu + b * log1mu - np.log(a) - betaln(a, b))
            corr = np.where(np.isfinite(corr), corr, 0.0)
            for j in range(1, len(wj)):
                ival = ival - corr
                corr = corr * u * (a + b) / (a + 1.0)
                a += 1.0
                acc += wj[j] * ival
        out += w_k * acc
    return np.clip(out, 0.0, 1.0)


def cf_sample(law: ComplexFLaw, rng: np.random.Generator, size: int = 1):
    num = cchi2_sample(ComplexChiSquareLaw(law.dof_num, law.noncentrality_num), rng, size)
    den = cchi2_sample(ComplexChiSquareLaw(law.dof_den, law.noncentrality_den), rng, size)
    return num / den


# ---------------------------------------------------------------------------
# noncentrality parameters of the probed-cell projections


@dataclass(frozen=True)
class SnrVector:
    """Per-frequency matched-cell SNR ||b||^2 |tau|^2 / sigma^2."""

    delta_sq: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.delta_sq)
        object.__setattr__(self, "delta_sq", vals)
        if any(v < 0 for v in vals):
            raise ValueError("SNR entries must be nonnegative")


def snr_vector(
    layout: ArrayLayout, plan: FrequencyPlan, position: Position2D, tau_per_freq, noise_var
) -> SnrVector:
    taus = np.asarray(tau_per_freq, dtype=complex).ravel()
    out = []
    for ell, kappa in enumerate(plan.wavenumbers):
        s = steering(layout, position, kappa)
        out.append(s.b_norm_sq * abs(taus[ell]) ** 2 / float(noise_var[ell]))
    return SnrVector(tuple(out))


@dataclass
class NoncentralityField:
    """Captured/leaked signal-to-noise split per frequency per grid cell."""

    grid: ImageGridSpec
    delta_n: np.ndarray  # (L, ny, nx)
    delta_d: np.ndarray  # (L, ny, nx)
    b_norm_sq: np.ndarray  # (L, ny, nx)
    total: np.ndarray  # (L,) full signal energy over noise, cell-independent
    mask: np.ndarray  # (ny, nx)
    n_dim: int  # N = N_T * N_R


def _clamp_leak(delta_d, total) -> np.ndarray:
    tol = 1e-9 + 1e-12 * abs(total)
    if np.any(np.asarray(delta_d) < -tol):
        raise ValueError("leaked energy came out negative beyond tolerance")
    return np.maximum(delta_d, 0.0)


def noncentrality_projection(
    scene: ScattererSet,
    layout: ArrayLayout,
    plan: FrequencyPlan,
    model: str,
    noise_var,
    probe: Position2D,
):
    """Brute-force route: Kronecker array matrix and explicit projector
    matrices. Returns (delta_n, delta_d) arrays of length L."""
    dn, dd = [], []
    for ell, kappa in enumerate(plan.wavenumbers):
        a_t, a_r = array_matrices(layout, scene.positions, kappa)
        m = scattering_matrix(scene, ell, kappa, model)
        mean_vec = np.kron(a_t, a_r) @ vectorize(m)
        b = steering(layout, probe, kappa).b
        proj = np.outer(b, b.conj()) / np.real(np.vdot(b, b))
        comp = np.eye(b.size) - proj
        var = float(noise_var[ell])
        dn.append(float(np.real(mean_vec.conj() @ proj @ mean_vec)) / var)
        dd.append(float(np.real(mean_vec.conj() @ comp @ mean_vec)) / var)
    return np.array(dn), np.array(dd)


def noncentrality_explicit(
    scene: ScattererSet,
    layout: ArrayLayout,
    plan: FrequencyPlan,
    model: str,
    noise_var,
    probe: Position2D,
):
    """Point-spread route: captured energy via the normalized array
    cross-responses, leaked energy by subtraction from the total."""
    dn, dd = [], []
    for ell, kappa in enumerate(plan.wavenumbers):
        a_t, a_r = array_matrices(layout, scene.positions, kappa)
        m = scattering_matrix(scene, ell, kappa, model)
        s = steering(layout, probe, kappa)
        nt = float(np.real(np.vdot(s.a_t, s.a_t)))
        nr = float(np.real(np.vdot(s.a_r, s.a_r)))
        h_t = (a_t.conj().T @ s.a_t) / nt
        h_r = (a_r.conj().T @ s.a_r) / nr
        val = np.dot(h_r.conj(), m @ h_t.conj())
        var = float(noise_var[ell])
        mean_mat = a_r @ m @ a_t.T
        total = float(np.linalg.norm(mean_mat, "fro") ** 2) / var
        cap = abs(val) ** 2 * nt * nr / var
        dn.append(cap)
        dd.append(float(_clamp_leak(total - cap, total)))
    return np.array(dn), np.array(dd)


def noncentrality_field(
    scene: ScattererSet,
    layout: ArrayLayout,
    plan: FrequencyPlan,
    model: str,
    noise_var,
    grid: ImageGridSpec,
) -> NoncentralityField:
    """Point-spread route evaluated on every grid cell at once."""
    cells = grid.cell_centers()
    near = element_distances(layout, cells) < ELEMENT_EXCLUSION
    safe = cells.copy()
    if np.any(near) and np.any(~near):
        safe[near] = cells[~near][0]
    n_l = plan.n_freq
    shape = grid.shape
    delta_n = np.zeros((n_l,) + shape)
    delta_d = np.zeros((n_l,) + shape)
    bnsq = np.zeros((n_l,) + shape)
    totals = np.zeros(n_l)
    for ell, kappa in enumerate(plan.wavenumbers):
        a_t, a_r = array_matrices(layout, scene.positions, kappa)
        m = scattering_matrix(scene, ell, kappa, model)
        at_cells, ar_cells = steering_many(layout, safe, kappa)
        nt = np.real(np.einsum("ic,ic->c", at_cells.conj(), at_cells))
        nr = np.real(np.einsum("ic,ic->c", ar_cells.conj(), ar_cells))
        h_t = (a_t.conj().T @ at_cells) / nt
        h_r = (a_r.conj().T @ ar_cells) / nr
        val = np.einsum("mc,mc->c", h_r.conj(), m @ h_t.conj())
        var = float(noise_var[ell])
        total = float(np.linalg.norm(a_r @ m @ a_t.T, "fro") ** 2) / var
        cap = np.abs(val) ** 2 * nt * nr / var
        leak = _clamp_leak(total - cap, total)
        delta_n[ell] = cap.reshape(shape)
        delta_d[ell] = leak.reshape(shape)
        bnsq[ell] = (nt * nr).reshape(shape)
        totals[ell] = total
    return NoncentralityField(
        grid=grid,
        delta_n=delta_n,
        delta_d=delta_d,
        b_norm_sq=bnsq,
        total=totals,
        mask=near.reshape(shape),
        n_dim=layout.n_total,
    )


# ---------------------------------------------------------------------------
# per-statistic laws


def stat_law_from_deltas(
    statistic: str,
    delta_n,
    delta_d,
    noise_var,
    b_norm_sq,
    n_dim: int,
    freq_index: int | None = None,
):
    """Exact law of a statistic given per-frequency noncentrality pairs at
    one probed cell. Per-frequency statistics (mf, ml, xi) need freq_index
    unless there is a single frequency."""
    delta_n = np.atleast_1d(np.asarray(delta_n, dtype=float))
    delta_d = np.atleast_1d(np.asarray(delta_d, dtype=float))
    noise_var = np.atleast_1d(np.asarray(noise_var, dtype=float))
    b_norm_sq = np.atleast_1d(np.asarray(b_norm_sq, dtype=float))
    n_l = len(delta_n)
    if statistic in ("glr", "rao", "wald", "gm", "hm"):
        raise UnsupportedStatistic(
            f"{statistic!r} has no closed-form law; validate it by sampling"
        )
    if statistic in ("mf", "ml", "xi"):
        if freq_index is None:
            if n_l != 1:
                raise ValueError(f"{statistic!r} is per-frequency: pass freq_index")
            freq_index = 0
        dn = float(delta_n[freq_index])
        dd = float(delta_d[freq_index])
        var = float(noise_var[freq_index])
        bn = float(b_norm_sq[freq_index])
        if statistic == "mf":
            return ComplexChiSquareLaw(1, dn, var * bn)
        if statistic == "ml":
            return ComplexChiSquareLaw(1, dn, var / bn)
        return ComplexFLaw(1, n_dim - 1, dn, dd)
    if statistic == "na":
        freqs = range(n_l) if freq_index is None else [freq_index]
        return ComplexChiSquareLaw(len(list(freqs)), float(sum(delta_n[f] for f in freqs)), 1.0)
    if statistic == "li":
        freqs = range(n_l) if freq_index is None else [freq_index]
        return [ComplexChiSquareLaw(n_dim - 1, float(delta_d[f]), 1.0) for f in freqs]
    raise UnsupportedStatistic(f"unknown statistic {statistic!r}")


def predict_stat_law(
    statistic: str,
    field: NoncentralityField,
    cell,
    noise_var,
    freq_index: int | None = None,
):
    """Law of a statistic at grid cell (row, col) of a noncentrality field."""
    j, i = cell
    if field.mask[j, i]:
        raise ValueError("cell is masked (sits on an array element)")
    return stat_law_from_deltas(
        statistic,
        field.delta_n[:, j, i],
        field.delta_d[:, j, i],
        noise_var,
        field.b_norm_sq[:, j, i],
        field.n_dim,
        freq_index,
    )


def mpi_stat(xi_values, snr: SnrVector, dof_den: int) -> float:
    """Clairvoyant most-powerful-invariant statistic: product over
    frequencies of noncentral-over-central F density ratios, computed in the
    log domain to survive large dimensions."""
    vals = tuple(getattr(xi_values, "xi", xi_values))
    if len(vals) != len(snr.delta_sq):
        raise ValueError("one SNR entry per frequency is required")
    log_t = 0.0
    central = ComplexFLaw(1, dof_den)
    for v, d in zip(vals, snr.delta_sq):
        law1 = ComplexFLaw(1, dof_den, d, 0.0)
        log_t += float(cf_logpdf(law1, v)) - float(cf_logpdf(central, v))
    return float(np.exp(log_t))
