"""Per-cell decision statistics and imaging maps over a probed grid.

Every statistic reduces, per frequency, to inner products of the data
vector x = vec(X) with the steering vector b = kron(a_T, a_R):

    coherent energy   x'P_b x   = |b'x|^2 / ||b||^2
    residual energy   x'P_b_perp x = ||x||^2 - x'P_b x

Projector matrices are never materialized. The adaptive statistics are
functions of the per-frequency ratio Xi = coherent/residual only, which
makes them insensitive to the (unknown) per-frequency noise power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDenominator, ZeroXi
from .forward import MdmSet, vectorize
from .scene import ArrayLayout, FrequencyPlan, element_distances, steering, steering_many

STATISTICS = ("mf", "ml", "li", "na", "glr", "rao", "wald", "gm", "hm")

# Statistics whose maps are rendered in natural log by default.
LOG_DEFAULT = ("glr", "li")

# Grid cells closer than this to an array element are masked, not probed.
ELEMENT_EXCLUSION = 1e-6

# Residuals in [-tol, 0] (relative to ||x||^2) are treated as exact zeros.
_RESIDUAL_REL_TOL = 1e-12


@dataclass(frozen=True)
class ImageGridSpec:
    """Rectangular probing grid, inclusive of both extents."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    step: float

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.x_max < self.x_min or self.y_max < self.y_min:
            raise ValueError("grid extents are empty")

    @staticmethod
    def _axis(lo: float, hi: float, step: float) -> np.ndarray:
        n = int(round((hi - lo) / step)) + 1
        if lo + (n - 1) * step > hi + step * 1e-6:
            n -= 1
        return lo + step * np.arange(max(n, 1))

    def x_coords(self) -> np.ndarray:
        return self._axis(self.x_min, self.x_max, self.step)

    def y_coords(self) -> np.ndarray:
        return self._axis(self.y_min, self.y_max, self.step)

    @property
    def shape(self):
        return (len(self.y_coords()), len(self.x_coords()))

    def cell_centers(self) -> np.ndarray:
        """All probed points, shape (n_cells, 2), x varying fastest."""
        xs = self.x_coords()
        ys = self.y_coords()
        gx, gy = np.meshgrid(xs, ys)
        return np.column_stack([gx.ravel(), gy.ravel()])


@dataclass
class ImageMap:
    """One statistic evaluated per grid cell (rows = y, cols = x)."""

    spec: ImageGridSpec
    values: np.ndarray
    statistic_name: str
    log_applied: bool = False
    mask: np.ndarray | None = None  # True where the cell is invalid

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.spec.shape:
            raise ValueError("values shape does not match the grid")
        if self.mask is None:
            self.mask = np.zeros(self.values.shape, dtype=bool)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("map values must be finite (masked cells carry 0)")

    def argmax_cell(self):
        """(x, y, value) of the largest unmasked cell."""
        vals = np.where(self.mask, -np.inf, self.values)
        j, i = np.unravel_index(np.argmax(vals), vals.shape)
        return (
            float(self.spec.x_coords()[i]),
            float(self.spec.y_coords()[j]),
            float(self.values[j, i]),
        )

    def top_local_maxima(self, count: int, min_separation: float):
        """Largest local maxima (8-neighborhood) at least min_separation
        apart, as (x, y, value) triples sorted by value."""
        v = np.where(self.mask, -np.inf, self.values)
        pad = np.pad(v, 1, constant_values=-np.inf)
        is_peak = np.ones_like(v, dtype=bool)
        for dj in (-1, 0, 1):
            for di in (-1, 0, 1):
                if dj == 0 and di == 0:
                    continue
                is_peak &= v >= pad[1 + dj : 1 + dj + v.shape[0], 1 + di : 1 + di + v.shape[1]]
        is_peak &= np.isfinite(v)
        js, iis = np.nonzero(is_peak)
        order = np.argsort(v[js, iis])[::-1]
        xs, ys = self.spec.x_coords(), self.spec.y_coords()
        picked = []
        for k in order:
            x, y = float(xs[iis[k]]), float(ys[js[k]])
            if all(math.hypot(x - px, y - py) >= min_separation for px, py, _ in picked):
                picked.append((x, y, float(v[js[k], iis[k]])))
            if len(picked) == count:
                break
        return picked


def _coherent_energy(x: np.ndarray, b: np.ndarray) -> float:
    bn = float(np.real(np.vdot(b, b)))
    if bn <= 0:
        raise ValueError("steering vector must be nonzero")
    return abs(np.vdot(b, x)) ** 2 / bn


def xi(x: np.ndarray, b: np.ndarray) -> float:
    """Ratio of projected to residual data energy along b."""
    x = np.asarray(x, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if x.shape != b.shape or x.size < 2:
        raise ValueError("x and b must be equal-length vectors with N >= 2")
    total = float(np.real(np.vdot(x, x)))
    num = _coherent_energy(x, b)
    resid = total - num
    if resid <= 0.0:
        if resid >= -_RESIDUAL_REL_TOL * total:
            resid = 0.0
        raise DegenerateDenominator(
            "data vector is (numerically) proportional to the steering vector"
        )
    return num / resid


@dataclass(frozen=True)
class XiVector:
    """Per-frequency projected-to-residual energy ratios."""

    xi: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.xi)
        object.__setattr__(self, "xi", vals)
        if any(v < 0 or not math.isfinite(v) for v in vals):
            raise ValueError("ratios must be finite and nonnegative")

    @classmethod
    def from_mdm(cls, mdm: MdmSet, steerings) -> "XiVector":
        return cls(tuple(xi(vectorize(m), s.b) for m, s in zip(mdm.matrices, steerings)))


def glr_stat(xiv: XiVector) -> float:
    return float(np.prod([1.0 + v for v in xiv.xi]))


def rao_stat(xiv: XiVector) -> float:
    return float(sum(v / (v + 1.0) for v in xiv.xi))


def wald_stat(xiv: XiVector) -> float:
    return float(sum(xiv.xi))


def gm_stat(xiv: XiVector) -> float:
    """Geometric mean of the per-frequency ratios."""
    return float(np.prod(xiv.xi) ** (1.0 / len(xiv.xi)))


def hm_stat(xiv: XiVector) -> float:
    """Harmonic mean; undefined when any ratio is exactly zero."""
    if any(v == 0.0 for v in xiv.xi):
        raise ZeroXi("harmonic mean undefined for a zero ratio")
    return len(xiv.xi) / sum(1.0 / v for v in xiv.xi)


def na_stat(mdm: MdmSet, steerings) -> float:
    """Known-noise statistic: sum over frequencies of coherent energy
    scaled by 1/noise power."""
    total = 0.0
    for m, s, var in zip(mdm.matrices, steerings, mdm.noise_var):
        if var <= 0:
            raise ValueError("noise variances must be positive")
        total += _coherent_energy(vectorize(m), s.b) / var
    return total


def mf_image_stat(x_mat: np.ndarray, a_t: np.ndarray, a_r: np.ndarray) -> float:
    """Matched-filter value |a_r' X conj(a_t)|^2 at one frequency."""
    return abs(np.vdot(a_r, x_mat @ np.conj(a_t))) ** 2


def ml_image_stat(x_mat: np.ndarray, a_t: np.ndarray, a_r: np.ndarray) -> float:
    """Matched-filter value normalized by squared steering energies; equals
    the squared magnitude of the least-squares amplitude estimate."""
    nt = float(np.real(np.vdot(a_t, a_t)))
    nr = float(np.real(np.vdot(a_r, a_r)))
    return mf_image_stat(x_mat, a_t, a_r) / (nr**2 * nt**2)


def likelihood_image_stat(mdm: MdmSet, steerings) -> float:
    """Product over frequencies of reciprocal residual energies."""
    out = 1.0
    for m, s in zip(mdm.matrices, steerings):
        x = vectorize(m)
        resid = float(np.real(np.vdot(x, x))) - _coherent_energy(x, s.b)
        if resid <= 0.0:
            raise DegenerateDenominator("zero residual energy")
        out *= 1.0 / resid
    return out


def unitary_completion(b: np.ndarray) -> np.ndarray:
    """Unitary matrix whose first column is b/||b||, completed with
    Gram-Schmidt (two orthogonalization passes) over standard basis vectors.

    Columns are accumulated as rows of a C-ordered buffer so the inner
    products run on contiguous memory; for a standard-basis candidate the
    first projection pass reduces to reading one column of that buffer."""
    b = np.asarray(b, dtype=complex)
    n = b.size
    nb = np.linalg.norm(b)
    if nb == 0:
        raise ValueError("steering vector must be nonzero")
    rows = np.zeros((n, n), dtype=complex)  # rows[k] holds basis column k
    rows[0] = b / nb
    k = 1
    for i in range(n):
        if k == n:
            break
        v = -(rows[:k].T @ rows[:k, i].conj())
        v[i] += 1.0
        coeff = (rows[:k] @ v.conj()).conj()  # second pass: Q'v
        v -= rows[:k].T @ coeff
        norm = np.linalg.norm(v)
        if norm > 0.5:  # skip basis vectors nearly inside the current span
            rows[k] = v / norm
            k += 1
    if k != n:
        raise RuntimeError("failed to complete an orthonormal basis")
    return rows.T.copy()


def mis(x: np.ndarray, b: np.ndarray) -> float:
    """Maximal-invariant value computed in canonical coordinates: rotate by
    a unitary aligning b with the first axis, then take |first|^2 over the
    energy of the remaining coordinates. Equals xi(x, b)."""
    x = np.asarray(x, dtype=complex)
    u = unitary_completion(np.asarray(b, dtype=complex))
    xbar = u.conj().T @ x
    head = abs(xbar[0]) ** 2
    tail = float(np.real(np.vdot(xbar[1:], xbar[1:])))
    if tail <= _RESIDUAL_REL_TOL * float(np.real(np.vdot(x, x))):
        raise DegenerateDenominator("canonical tail energy is zero")
    return head / tail


@dataclass
class SteeringField:
    """Steering vectors for every grid cell, one matrix per frequency.

    Stores the conjugated vectors; cell evaluations use einsum reductions,
    whose per-cell results do not depend on how the grid is batched."""

    grid: ImageGridSpec
    b_conj: list = field(default_factory=list)  # per freq: (N, n_cells)
    b_norm_sq: list = field(default_factory=list)  # per freq: (n_cells,)
    cell_mask: np.ndarray | None = None  # (n_cells,) True = excluded

    @property
    def n_cells(self) -> int:
        return self.b_conj[0].shape[1]


def build_steering_field(
    layout: ArrayLayout, plan: FrequencyPlan, grid: ImageGridSpec
) -> SteeringField:
    """Precompute per-cell steering vectors; cells on top of array elements
    are excluded via the mask."""
    cells = grid.cell_centers()
    near = element_distances(layout, cells) < ELEMENT_EXCLUSION
    safe = cells.copy()
    if np.any(near):
        # placeholder probe far from the arrays; masked cells are never read
        safe[near] = cells[~near][0] if np.any(~near) else (1e6, 1e6)
    field_ = SteeringField(grid=grid, cell_mask=near)
    for kappa in plan.wavenumbers:
        a_t, a_r = steering_many(layout, safe, kappa)
        b = (a_t[:, None, :] * a_r[None, :, :]).reshape(layout.n_total, -1)
        bc = b.conj()
        field_.b_conj.append(bc)
        field_.b_norm_sq.append(np.real(np.einsum("ic,ic->c", bc, b)))
    return field_


def _per_freq_energies(field_: SteeringField, mdm: MdmSet):
    """Per frequency: (coherent |b'x|^2, x'P_b x, residual, ||x||^2)."""
    cap, num, resid, total = [], [], [], []
    for ell, mat in enumerate(mdm.matrices):
        x = vectorize(mat)
        t = float(np.real(np.vdot(x, x)))
        c = np.abs(np.einsum("ic,i->c", field_.b_conj[ell], x)) ** 2
        n = c / field_.b_norm_sq[ell]
        r = t - n
        cap.append(c)
        num.append(n)
        resid.append(r)
        total.append(t)
    return cap, num, resid, total


def map_values(
    field_: SteeringField,
    statistic: str,
    mdm: MdmSet,
    log: bool | None = None,
    freq_index: int | None = None,
):
    """Evaluate one statistic on every cell of a precomputed field.

    Returns (values, mask, log_applied) as flat arrays. Degenerate cells
    (zero residual where a residual is needed) are masked rather than
    raising, so long Monte Carlo runs survive probability-zero events.
    """
    if statistic not in STATISTICS:
        raise ValueError(f"unknown statistic {statistic!r}")
    if log is None:
        log = statistic in LOG_DEFAULT
    elif log and statistic not in ("glr", "li"):
        raise ValueError(f"log rendering is not defined for {statistic!r}")
    freqs = range(mdm.n_freq) if freq_index is None else [freq_index]
    cap, num, resid, total = _per_freq_energies(field_, mdm)
    mask = field_.cell_mask.copy()

    def _xi(ell):
        r = resid[ell]
        bad = r <= _RESIDUAL_REL_TOL * total[ell]
        out = np.divide(num[ell], r, out=np.zeros_like(r), where=~bad)
        return out, bad

    if statistic == "mf":
        vals = sum(cap[ell] for ell in freqs)
    elif statistic == "ml":
        vals = sum(cap[ell] / field_.b_norm_sq[ell] ** 2 for ell in freqs)
    elif statistic == "na":
        vals = sum(num[ell] / mdm.noise_var[ell] for ell in freqs)
    elif statistic == "li":
        acc = np.zeros(field_.n_cells)
        for ell in freqs:
            bad = resid[ell] <= _RESIDUAL_REL_TOL * total[ell]
            mask |= bad
            acc -= np.log(np.where(bad, 1.0, resid[ell]))
        vals = acc if log else np.exp(acc)
    elif statistic == "glr":
        acc = np.zeros(field_.n_cells)
        for ell in freqs:
            bad = resid[ell] <= _RESIDUAL_REL_TOL * total[ell]
            mask |= bad
            acc += np.log(total[ell]) - np.log(np.where(bad, 1.0, resid[ell]))
        vals = acc if log else np.exp(acc)
    elif statistic == "rao":
        vals = np.zeros(field_.n_cells)
        for ell in freqs:
            xs, bad = _xi(ell)
            mask |= bad
            vals += xs / (xs + 1.0)
    elif statistic == "wald":
        vals = np.zeros(field_.n_cells)
        for ell in freqs:
            xs, bad = _xi(ell)
            mask |= bad
            vals += xs
    elif statistic == "gm":
        acc = np.zeros(field_.n_cells)
        nf = 0
        for ell in freqs:
            xs, bad = _xi(ell)
            zero = xs <= 0.0
            mask |= bad
            acc += np.log(np.where(zero | bad, 1.0, xs))
            acc[zero & ~bad] = -np.inf
            nf += 1
        with np.errstate(under="ignore"):
            vals = np.exp(acc / nf)
    else:  # hm
        acc = np.zeros(field_.n_cells)
        nf = 0
        for ell in freqs:
            xs, bad = _xi(ell)
            zero = (xs <= 0.0) | bad
            mask |= zero  # a zero ratio leaves the harmonic mean undefined
            acc += np.divide(1.0, xs, out=np.zeros_like(xs), where=~zero)
            nf += 1
        vals = np.divide(nf, acc, out=np.zeros_like(acc), where=acc > 0)

    vals = np.where(mask | ~np.isfinite(vals), 0.0, vals)
    return vals, mask, log


def render_map(
    statistic: str,
    mdm: MdmSet,
    layout: ArrayLayout,
    plan: FrequencyPlan,
    grid: ImageGridSpec,
    log: bool | None = None,
    freq_index: int | None = None,
) -> ImageMap:
    """Evaluate one statistic at every grid cell of one realization."""
    field_ = build_steering_field(layout, plan, grid)
    vals, mask, log_applied = map_values(field_, statistic, mdm, log, freq_index)
    shape = grid.shape
    return ImageMap(
        spec=grid,
        values=vals.reshape(shape),
        statistic_name=statistic,
        log_applied=log_applied,
        mask=mask.reshape(shape),
    )


def steering_sets(layout: ArrayLayout, plan: FrequencyPlan, probe) -> list:
    """Per-frequency steering sets for a single probe point."""
    return [steering(layout, probe, k) for k in plan.wavenumbers]


__all__ = [
    "STATISTICS",
    "LOG_DEFAULT",
    "ImageGridSpec",
    "ImageMap",
    "XiVector",
    "SteeringField",
    "build_steering_field",
    "map_values",
    "render_map",
    "steering_sets",
    "xi",
    "mis",
    "unitary_completion",
    "glr_stat",
    "rao_stat",
    "wald_stat",
    "gm_stat",
    "hm_stat",
    "na_stat",
    "mf_image_stat",
    "ml_image_stat",
    "likelihood_image_stat",
]
