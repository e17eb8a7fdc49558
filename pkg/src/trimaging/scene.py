"""Array geometry, 2-D background Green function, and steering vectors.

All propagation is scalar 2-D in a homogeneous background. The Green
function between two points is the zeroth-order Hankel function of the
first kind of (wavenumber * distance); the constant j/4 factor is dropped
since it cancels in every statistic built here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bessel import j0, y0
from .errors import SingularGreen

SPEED_OF_LIGHT = 2.99792458e8  # m/s

# Minimum source/observer separation: Y0 diverges logarithmically at zero.
EPS_MIN = 1e-9


@dataclass(frozen=True)
class Position2D:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("coordinates must be finite")

    def distance_to(self, other: "Position2D") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class ArrayLayout:
    """Transmit and receive element positions."""

    tx_elements: tuple
    rx_elements: tuple

    def __post_init__(self):
        tx = tuple(self.tx_elements)
        rx = tuple(self.rx_elements)
        object.__setattr__(self, "tx_elements", tx)
        object.__setattr__(self, "rx_elements", rx)
        if len(tx) < 1 or len(rx) < 1:
            raise ValueError("both arrays need at least one element")
        for name, elems in (("tx", tx), ("rx", rx)):
            for i in range(len(elems)):
                for j in range(i + 1, len(elems)):
                    if elems[i].distance_to(elems[j]) < EPS_MIN:
                        raise ValueError(f"coincident {name} elements {i} and {j}")

    @property
    def n_tx(self) -> int:
        return len(self.tx_elements)

    @property
    def n_rx(self) -> int:
        return len(self.rx_elements)

    @property
    def n_total(self) -> int:
        return self.n_tx * self.n_rx

    def tx_coords(self) -> np.ndarray:
        return np.array([[p.x, p.y] for p in self.tx_elements])

    def rx_coords(self) -> np.ndarray:
        return np.array([[p.x, p.y] for p in self.rx_elements])


def linear_array(count: int, spacing: float, origin, direction=(1.0, 0.0)):
    """Equally spaced elements starting at origin along a unit direction."""
    if count < 1:
        raise ValueError("count must be >= 1")
    dx, dy = direction
    norm = math.hypot(dx, dy)
    if norm == 0:
        raise ValueError("direction must be nonzero")
    dx, dy = dx / norm, dy / norm
    x0, y0_ = origin
    return tuple(
        Position2D(x0 + i * spacing * dx, y0_ + i * spacing * dy)
        for i in range(count)
    )


def default_layout() -> ArrayLayout:
    """Non-colocated half-meter-spaced linear arrays: 11 Tx along y=0,
    17 Rx along y=1."""
    return ArrayLayout(
        tx_elements=linear_array(11, 0.5, (-2.5, 0.0)),
        rx_elements=linear_array(17, 0.5, (-4.0, 1.0)),
    )


@dataclass(frozen=True)
class FrequencyPlan:
    """Probing frequencies with derived wavelengths and wavenumbers."""

    frequencies_hz: tuple
    wavelengths_m: tuple = field(init=False)
    wavenumbers: tuple = field(init=False)

    def __post_init__(self):
        freqs = tuple(float(f) for f in self.frequencies_hz)
        if len(freqs) < 1:
            raise ValueError("at least one frequency is required")
        if any(f <= 0 for f in freqs):
            raise ValueError("frequencies must be positive")
        if len(set(freqs)) != len(freqs):
            raise ValueError("frequencies must be distinct")
        object.__setattr__(self, "frequencies_hz", freqs)
        lams = tuple(SPEED_OF_LIGHT / f for f in freqs)
        object.__setattr__(self, "wavelengths_m", lams)
        object.__setattr__(self, "wavenumbers", tuple(2 * math.pi / l for l in lams))

    @classmethod
    def from_wavelengths(cls, wavelengths_m) -> "FrequencyPlan":
        lams = [float(l) for l in wavelengths_m]
        if any(l <= 0 for l in lams):
            raise ValueError("wavelengths must be positive")
        plan = cls(tuple(SPEED_OF_LIGHT / l for l in lams))
        # keep the user-supplied wavelengths exact instead of re-deriving
        object.__setattr__(plan, "wavelengths_m", tuple(lams))
        object.__setattr__(
            plan, "wavenumbers", tuple(2 * math.pi / l for l in lams)
        )
        return plan

    @property
    def n_freq(self) -> int:
        return len(self.frequencies_hz)


def default_plan() -> FrequencyPlan:
    return FrequencyPlan.from_wavelengths((1.0, 0.5, 1.0 / 3.0))


@dataclass(frozen=True)
class SteeringSet:
    """Tx/Rx Green vectors to a probed point and their Kronecker product."""

    a_t: np.ndarray  # (N_T,)
    a_r: np.ndarray  # (N_R,)
    b: np.ndarray  # (N_T * N_R,), b = kron(a_t, a_r)

    @property
    def b_norm_sq(self) -> float:
        return float(np.real(np.vdot(self.b, self.b)))


def green(src: Position2D, dst: Position2D, wavenumber: float) -> complex:
    """Scalar 2-D background Green value J0(kr) + i*Y0(kr) between two points."""
    if wavenumber <= 0:
        raise ValueError("wavenumber must be positive")
    r = src.distance_to(dst)
    if r < EPS_MIN:
        raise SingularGreen(f"separation {r:.3e} m below {EPS_MIN:.0e} m")
    kr = wavenumber * r
    return complex(j0(kr), y0(kr))


def green_from_distances(dists: np.ndarray, wavenumber: float) -> np.ndarray:
    """Vectorized Green values for an array of separations."""
    dists = np.asarray(dists, dtype=float)
    if np.any(dists < EPS_MIN):
        raise SingularGreen("separation below the singularity guard")
    kr = wavenumber * dists
    return j0(kr) + 1j * y0(kr)


def steering(layout: ArrayLayout, probe: Position2D, wavenumber: float) -> SteeringSet:
    """Green vectors from each array to the probed point, plus their
    Kronecker product b (column-major vectorization convention)."""
    p = probe.as_array()
    d_t = np.hypot(*(layout.tx_coords() - p).T)
    d_r = np.hypot(*(layout.rx_coords() - p).T)
    a_t = green_from_distances(d_t, wavenumber)
    a_r = green_from_distances(d_r, wavenumber)
    return SteeringSet(a_t=a_t, a_r=a_r, b=np.kron(a_t, a_r))


def steering_many(layout: ArrayLayout, probes: np.ndarray, wavenumber: float):
    """Tx/Rx Green vectors for many probe points at once.

    probes is (n, 2); returns (a_t, a_r) of shapes (N_T, n) and (N_R, n).
    Raises SingularGreen if any probe sits on an array element; callers that
    need masking should pre-filter with element_distances().
    """
    probes = np.asarray(probes, dtype=float)
    d_t = np.linalg.norm(layout.tx_coords()[:, None, :] - probes[None, :, :], axis=2)
    d_r = np.linalg.norm(layout.rx_coords()[:, None, :] - probes[None, :, :], axis=2)
    return (
        green_from_distances(d_t, wavenumber),
        green_from_distances(d_r, wavenumber),
    )


def element_distances(layout: ArrayLayout, probes: np.ndarray) -> np.ndarray:
    """Distance from each probe point to the nearest array element."""
    probes = np.asarray(probes, dtype=float)
    elems = np.vstack([layout.tx_coords(), layout.rx_coords()])
    d = np.linalg.norm(elems[:, None, :] - probes[None, :, :], axis=2)
    return d.min(axis=0)


def array_matrices(layout: ArrayLayout, positions, wavenumber: float):
    """Green matrices from the arrays to a list of scatterer positions.

    Returns (A_T, A_R) with shapes (N_T, M) and (N_R, M); entry (i, j) is
    the Green value between element i and scatterer j.
    """
    pts = np.array([[p.x, p.y] for p in positions])
    d_t = np.linalg.norm(layout.tx_coords()[:, None, :] - pts[None, :, :], axis=2)
    d_r = np.linalg.norm(layout.rx_coords()[:, None, :] - pts[None, :, :], axis=2)
    return (
        green_from_distances(d_t, wavenumber),
        green_from_distances(d_r, wavenumber),
    )
