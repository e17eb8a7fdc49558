"""Forward model: multistatic data matrix synthesis under BA or FL scattering.

The measured matrix at each frequency is X = A_R M A_T^T + W with W filled
by i.i.d. circular complex Gaussian noise. Vectorization is column-major
throughout so that vec(a_R tau a_T^T) = kron(a_T, a_R) * tau.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularFoldyLax, ZeroTau
from .scene import EPS_MIN, ArrayLayout, FrequencyPlan, array_matrices, green

MODELS = ("BA", "FL")

# Reciprocal-condition threshold below which the FL inversion is refused.
FL_RCOND_MIN = 1e-12


@dataclass(frozen=True)
class ScattererSet:
    """Point scatterers: positions plus an (L x M) matrix of coefficients,
    one row per frequency."""

    positions: tuple  # M Position2D
    tau: np.ndarray  # (L, M) complex

    def __post_init__(self):
        pos = tuple(self.positions)
        tau = np.atleast_2d(np.asarray(self.tau, dtype=complex))
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "tau", tau)
        if len(pos) < 1:
            raise ValueError("at least one scatterer is required")
        if tau.shape[1] != len(pos):
            raise ValueError("tau columns must match the number of scatterers")
        for i in range(len(pos)):
            for j in range(i + 1, len(pos)):
                if pos[i].distance_to(pos[j]) < EPS_MIN:
                    raise ValueError(f"coincident scatterers {i} and {j}")

    @property
    def n_scatterers(self) -> int:
        return len(self.positions)

    @classmethod
    def from_constant_tau(cls, positions, tau_values, n_freq: int) -> "ScattererSet":
        """Same coefficients at every frequency."""
        row = np.asarray(tau_values, dtype=complex).reshape(1, -1)
        return cls(tuple(positions), np.repeat(row, n_freq, axis=0))


@dataclass(frozen=True)
class MdmSet:
    """One realization: per-frequency measured matrices and noise powers."""

    matrices: tuple  # L arrays of shape (N_R, N_T)
    noise_var: tuple  # L floats

    def __post_init__(self):
        mats = tuple(np.asarray(m, dtype=complex) for m in self.matrices)
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "noise_var", tuple(float(v) for v in self.noise_var))
        if len(mats) != len(self.noise_var):
            raise ValueError("one noise variance per frequency is required")
        shapes = {m.shape for m in mats}
        if len(shapes) > 1:
            raise ValueError("all matrices must share one shape")

    @property
    def n_freq(self) -> int:
        return len(self.matrices)

    def vectors(self):
        """Column-major vectorizations of all matrices."""
        return [vectorize(m) for m in self.matrices]


def vectorize(x: np.ndarray) -> np.ndarray:
    """Column-major (Fortran) stacking: entry (j, i) goes to index i*N_R + j."""
    return np.asarray(x).flatten(order="F")


def coupling_matrix(scene: ScattererSet, wavenumber: float) -> np.ndarray:
    """Inter-scatterer Green matrix with a zero diagonal."""
    m = scene.n_scatterers
    s = np.zeros((m, m), dtype=complex)
    for i in range(m):
        for j in range(m):
            if i != j:
                s[i, j] = green(scene.positions[i], scene.positions[j], wavenumber)
    return s


def foldy_lax_matrix(tau_row: np.ndarray, coupling: np.ndarray) -> np.ndarray:
    """Multiple-scattering matrix [diag(tau)^{-1} - S]^{-1}."""
    tau_row = np.asarray(tau_row, dtype=complex)
    if np.any(tau_row == 0):
        raise ZeroTau("FL model needs nonzero coefficients at every scatterer")
    z = np.diag(1.0 / tau_row) - coupling
    sv = np.linalg.svd(z, compute_uv=False)
    rcond = sv[-1] / sv[0] if sv[0] > 0 else 0.0
    if rcond < FL_RCOND_MIN:
        raise SingularFoldyLax(f"interaction matrix rcond {rcond:.2e}")
    return np.linalg.inv(z)


def scattering_matrix(
    scene: ScattererSet, freq_index: int, wavenumber: float, model: str
) -> np.ndarray:
    """Scattering matrix at one frequency: diag(tau) for BA, the Foldy-Lax
    inverse for FL. Both coincide for a single scatterer."""
    if model not in MODELS:
        raise ValueError(f"unknown scattering model {model!r}")
    tau_row = scene.tau[freq_index]
    if model == "BA" or scene.n_scatterers == 1:
        if model == "FL" and np.any(tau_row == 0):
            raise ZeroTau("FL model needs nonzero coefficients at every scatterer")
        return np.diag(tau_row)
    return foldy_lax_matrix(tau_row, coupling_matrix(scene, wavenumber))


def noise_rng(seed: int, freq_index: int, run_index: int = 0) -> np.random.Generator:
    """Independent, order-insensitive stream per (seed, run, frequency)."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(run_index, freq_index))
    return np.random.default_rng(ss)


def sample_noise_matrix(
    rng: np.random.Generator, n_rx: int, n_tx: int, variance: float
) -> np.ndarray:
    """Circular complex Gaussian matrix: each entry has the given total
    variance, split evenly between real and imaginary parts."""
    scale = np.sqrt(variance / 2.0)
    return scale * (
        rng.standard_normal((n_rx, n_tx)) + 1j * rng.standard_normal((n_rx, n_tx))
    )


def mean_matrices(
    layout: ArrayLayout,
    scene: ScattererSet | None,
    plan: FrequencyPlan,
    model: str,
):
    """Noise-free per-frequency matrices A_R M A_T^T (zeros when no scene)."""
    out = []
    for ell, kappa in enumerate(plan.wavenumbers):
        if scene is None:
            out.append(np.zeros((layout.n_rx, layout.n_tx), dtype=complex))
            continue
        a_t, a_r = array_matrices(layout, scene.positions, kappa)
        m = scattering_matrix(scene, ell, kappa, model)
        out.append(a_r @ m @ a_t.T)
    return out


def synthesize_mdm(
    layout: ArrayLayout,
    scene: ScattererSet | None,
    plan: FrequencyPlan,
    noise_var,
    model: str,
    rng_seed: int,
    run_index: int = 0,
) -> MdmSet:
    """One noisy realization of the per-frequency data matrices.

    scene=None synthesizes noise only. Noise is independent across
    frequencies and deterministic given (rng_seed, run_index).
    """
    noise_var = [float(v) for v in noise_var]
    if len(noise_var) != plan.n_freq:
        raise ValueError("one noise variance per frequency is required")
    if any(v < 0 for v in noise_var):
        raise ValueError("noise variances must be nonnegative")
    if scene is not None and scene.tau.shape[0] != plan.n_freq:
        raise ValueError("tau rows must match the number of frequencies")
    means = mean_matrices(layout, scene, plan, model)
    mats = []
    for ell, mean in enumerate(means):
        rng = noise_rng(rng_seed, ell, run_index)
        w = sample_noise_matrix(rng, layout.n_rx, layout.n_tx, noise_var[ell])
        mats.append(mean + w)
    return MdmSet(matrices=tuple(mats), noise_var=tuple(noise_var))
