"""Space-time phase of the jump data and the flow of the scattering data.

Theta(z; y, t) = -(k/4) y + 2 k t / (k^2 + 4),   k = z - 1/z,

where 2k/(k^2+4) = 2z(z^2-1)/(z^2+1)^2. M exp(i Theta s3) is the simultaneous
solution of the y and t equations, so the lower-left jump entry carries
exp(-2i Theta) and b(z; t) = exp(-4ikt/(k^2+4)) b(z; 0).

The linear flow above belongs to the equation with dispersion coefficient
kappa = 2. Other kappa > 0 are reached by rescaling, see KappaScaling.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError

CONVENTION = "Theta = -(k/4) y + 2kt/(k^2+4), k = z - 1/z; lower-left jump entry r exp(-2i Theta)"
NATIVE_KAPPA = 2.0


@dataclass(frozen=True)
class PhaseSpec:
    y: float
    t: float = 0.0
    time_sign: float = 1.0  # -1 only for mutation testing
    convention: str = CONVENTION

    def __post_init__(self):
        if self.t < 0:
            raise DomainError("negative time is not supported")


def time_rate(z, sign=1.0):
    """2k/(k^2+4) = 2 z (z^2-1)/(z^2+1)^2."""
    z = np.asarray(z, dtype=complex)
    return sign * 2.0 * z * (z * z - 1.0) / (z * z + 1.0) ** 2


def theta(z, y, t=0.0, time_sign=1.0):
    real_in = np.isrealobj(z)
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise DomainError("Theta is singular at z = 0")
    if t < 0:
        raise DomainError("negative time is not supported")
    out = -0.25 * (z - 1.0 / z) * y
    if t != 0:
        if np.any(np.isclose(z * z, -1.0, rtol=0, atol=1e-14)):
            raise DomainError("the time term of Theta has poles at z = +-i")
        out = out + time_rate(z, time_sign) * t
    if real_in:
        out = out.real
    return out[()] if out.ndim == 0 else out


def theta_k(k, y, t=0.0, time_sign=1.0):
    """Theta written in k, for the real spectral line."""
    k = np.asarray(k, dtype=float)
    return -0.25 * k * y + time_sign * 2.0 * k * t / (k * k + 4.0)


def phase(spec: PhaseSpec, z):
    return theta(z, spec.y, spec.t, spec.time_sign)


@dataclass
class EvolvedData:
    """Scattering data at time t: r, rtilde and c_j are the t = 0 values;
    the flow lives in Theta through `t`."""
    data: object
    t: float
    time_sign: float = 1.0

    def b_at(self):
        k = self.data.grid.k_nodes
        return self.data.b * np.exp(-4j * self.time_sign * k * self.t / (k * k + 4.0))

    def r_effective(self):
        k = self.data.grid.k_nodes
        return self.data.r * np.exp(-4j * self.time_sign * k * self.t / (k * k + 4.0))


def evolve_scattering(sd, t: float, time_sign: float = 1.0) -> EvolvedData:
    if t < 0:
        raise DomainError("negative time is not supported")
    return EvolvedData(data=sd, t=float(t), time_sign=time_sign)


@dataclass(frozen=True)
class KappaScaling:
    """If u solves the equation with coefficient kappa, then v = u/s at tau = s^2 t
    solves it with kappa/s^2. Choosing s^2 = kappa/2 lands on the native flow."""
    kappa: float = 1.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise DomainError("kappa must be positive")

    @property
    def s(self) -> float:
        return float(np.sqrt(self.kappa / NATIVE_KAPPA))

    def native_field(self, m):
        return np.asarray(m) / self.s

    def native_time(self, t):
        return self.s ** 2 * np.asarray(t)

    def physical_field(self, v):
        return self.s * np.asarray(v)

    def physical_time(self, tau):
        return np.asarray(tau) / self.s ** 2


def with_time_sign(spec: PhaseSpec, sign: float) -> PhaseSpec:
    return replace(spec, time_sign=sign)
