"""Spatial and spectral grids and the two-sheeted map between k and z."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError


def k_of_z(z):
    """k = z - 1/z."""
    z = np.asarray(z)
    if np.any(z == 0):
        raise DomainError("k_of_z is undefined at z = 0")
    out = z - 1.0 / z
    return out[()] if out.ndim == 0 else out


def lam_of_z(z):
    z = np.asarray(z)
    if np.any(z == 0):
        raise DomainError("lambda is undefined at z = 0")
    out = 0.5 * (z + 1.0 / z)
    return out[()] if out.ndim == 0 else out


def z_branches(k):
    """The two real preimages of k: z_plus > 0 and z_minus = -1/z_plus < 0."""
    k = np.asarray(k, dtype=float)
    s = np.sqrt(k * k + 4.0)
    # cancellation-free forms on each half line
    zp = np.where(k >= 0, 0.5 * (k + s), 2.0 / (s - k))
    zm = -1.0 / zp
    if zp.ndim == 0:
        return zp[()], zm[()]
    return zp, zm


@dataclass(frozen=True)
class SpatialGrid:
    lo: float
    hi: float
    n: int
    samples: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 16:
            raise ConfigError(f"spatial grid needs n >= 16, got {self.n}")
        if not self.hi > self.lo:
            raise ConfigError("spatial grid needs hi > lo")
        object.__setattr__(self, "samples", np.linspace(self.lo, self.hi, self.n))

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / (self.n - 1)


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform k nodes on [-k_max, k_max] pulled back to both z branches.

    An even node count keeps k = 0 off the grid; the grid is symmetric
    under k -> -k either way.
    """
    k_max: float
    n: int
    k_nodes: np.ndarray = field(init=False, repr=False, compare=False)
    z_plus_nodes: np.ndarray = field(init=False, repr=False, compare=False)
    z_minus_nodes: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 16:
            raise ConfigError(f"spectral grid needs n >= 16, got {self.n}")
        if not self.k_max > 0:
            raise ConfigError("k_max must be positive")
        k = np.linspace(-self.k_max, self.k_max, self.n)
        k = 0.5 * (k - k[::-1])  # exact symmetry
        zp, zm = z_branches(k)
        w = np.full(self.n, self.dk)
        object.__setattr__(self, "k_nodes", k)
        object.__setattr__(self, "z_plus_nodes", zp)
        object.__setattr__(self, "z_minus_nodes", zm)
        object.__setattr__(self, "weights", w)

    @property
    def dk(self) -> float:
        return 2.0 * self.k_max / (self.n - 1)

    @property
    def z_nodes(self) -> np.ndarray:
        """Both branches stacked, shape (2, n): row 0 is z_plus, row 1 z_minus."""
        return np.stack([self.z_plus_nodes, self.z_minus_nodes])

    @property
    def dz_dk(self) -> np.ndarray:
        z = self.z_nodes
        return z * z / (1.0 + z * z)


@dataclass
class GridConfig:
    x_half_width: float = 12.0
    n_x: int = 2401
    y_half_width: float = 11.0
    n_y: int = 221
    k_max: float = 24.0
    n_k: int | None = 1024
    t_max: float = 0.0


def max_spectral_spacing(y_half_width: float, t_max: float = 0.0) -> float:
    """Largest dk that still resolves the jump phase exp(2i Theta) on the y range.

    d(2 Theta)/dk is bounded by |y|/2 + t, so the requirement
    dk <= pi / (2 max|y|) at t = 0 becomes dk <= pi / (2 (max|y| + 2 t)).
    """
    return np.pi / (2.0 * (y_half_width + 2.0 * t_max))


def build_grids(config: GridConfig) -> tuple[SpatialGrid, SpectralGrid]:
    spatial = SpatialGrid(-config.x_half_width, config.x_half_width, config.n_x)
    dk_max = max_spectral_spacing(config.y_half_width, config.t_max)
    n_k = config.n_k
    if n_k is None:
        n_k = 16
        while 2.0 * config.k_max / (n_k - 1) > dk_max:
            n_k *= 2
    spectral = SpectralGrid(config.k_max, n_k)
    if spectral.dk > dk_max * (1 + 1e-12):
        raise ConfigError(
            f"spectral spacing {spectral.dk:.4g} exceeds {dk_max:.4g} needed for "
            f"|y| <= {config.y_half_width}, t <= {config.t_max}; raise n_k or lower k_max"
        )
    return spatial, spectral
