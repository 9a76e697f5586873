"""
Real elliptic integrals and Jacobi functions for ``0 <= k < 1``.

``F`` goes through Carlson's ``R_F`` (duplication, then the truncated symmetric series), ``K``
through the arithmetic-geometric mean and ``sn``/``cn``/``dn`` through the descending Landen
recursion of the AGM sequence.
"""

__all__ = [
    "CrossingOracleParams",
    "carlson_rf",
    "complete_K",
    "crossing_oracle_I",
    "crossing_oracle_spectra",
    "crossing_times",
    "elliptic_F",
    "jacobi_cn",
    "jacobi_sn",
    "jacobi_sn_cn_dn",
    "oracle_ode_residual",
]

import math
from typing import Self

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, model_validator

from szego_lab.errors import ModulusRangeError

AGM_TOL = 1e-14
DUPLICATION_TOL = 1e-4


def _check_modulus(k: float) -> None:
    if not 0.0 <= k < 1.0:
        raise ModulusRangeError(f"Elliptic modulus must satisfy 0 <= k < 1, got {k!r}.")


def carlson_rf(x: float, y: float, z: float) -> float:
    """Carlson's symmetric integral ``R_F(x, y, z)`` for non-negative arguments, at most one zero."""
    if min(x, y, z) < 0 or (x == 0) + (y == 0) + (z == 0) > 1:
        raise ValueError(f"R_F is undefined at ({x}, {y}, {z}).")
    while True:
        mean = (x + y + z) / 3.0
        deviation = max(abs(1 - x / mean), abs(1 - y / mean), abs(1 - z / mean))
        if deviation < DUPLICATION_TOL:
            break
        sx, sy, sz = math.sqrt(x), math.sqrt(y), math.sqrt(z)
        lam = sx * sy + sy * sz + sz * sx
        x, y, z = (x + lam) / 4.0, (y + lam) / 4.0, (z + lam) / 4.0
    dx, dy, dz = 1 - x / mean, 1 - y / mean, 1 - z / mean
    e2 = dx * dy + dy * dz + dz * dx
    e3 = dx * dy * dz
    series = (
        1
        - e2 / 10
        + e3 / 14
        + e2**2 / 24
        - 3 * e2 * e3 / 44
        - 5 * e2**3 / 208
        + 3 * e3**2 / 104
        + e2**2 * e3 / 16
    )
    return series / math.sqrt(mean)


def _agm_sequence(k: float) -> tuple[list[float], list[float]]:
    """``(a_n, c_n)`` of the AGM started at ``(1, sqrt(1 - k^2))`` with ``c_0 = k``."""
    a, b, c = 1.0, math.sqrt(1.0 - k * k), k
    a_values, c_values = [a], [c]
    while abs(c) >= AGM_TOL:
        a, b, c = (a + b) / 2.0, math.sqrt(a * b), (a - b) / 2.0
        a_values.append(a)
        c_values.append(c)
    return a_values, c_values


def complete_K(k: float) -> float:
    """``K(k) = pi / (2 AGM(1, sqrt(1 - k^2)))``."""
    _check_modulus(k)
    a_values, _ = _agm_sequence(k)
    return math.pi / (2.0 * a_values[-1])


def elliptic_F(phi: float, k: float) -> float:
    """
    Incomplete integral ``F(phi, k) = int_0^phi dtheta / sqrt(1 - k^2 sin^2 theta)``.

    ``phi = n pi + r`` with ``|r| <= pi / 2`` reduces to ``2 n K(k) + F(r, k)``.

    Raises:
        ModulusRangeError: ``k`` outside ``[0, 1)``.
    """
    _check_modulus(k)
    n = round(phi / math.pi)
    r = phi - n * math.pi
    s, c = math.sin(r), math.cos(r)
    reduced = s * carlson_rf(c * c, 1.0 - k * k * s * s, 1.0) if s != 0.0 else 0.0
    return 2.0 * n * complete_K(k) + reduced if n else reduced


def jacobi_sn_cn_dn(
    x: ArrayLike,
    k: float,
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    """
    ``sn``, ``cn``, ``dn`` by descending Landen transformation.

    The AGM runs until ``|c_N| < 1e-14``; then ``phi_N = 2^N a_N x`` and
    ``phi_{n-1} = (phi_n + asin(c_n / a_n sin phi_n)) / 2`` gives the amplitude ``phi_0``.
    """
    _check_modulus(k)
    a_values, c_values = _agm_sequence(k)
    levels = len(a_values) - 1
    phi = (2.0**levels) * a_values[-1] * np.asarray(x, dtype=np.float64)
    previous = phi
    for n in range(levels, 0, -1):
        previous = phi
        phi = 0.5 * (phi + np.arcsin(c_values[n] / a_values[n] * np.sin(phi)))
    sn = np.sin(phi)
    cn = np.cos(phi)
    dn = np.cos(phi) / np.cos(previous - phi) if levels else np.ones_like(phi)
    return sn, cn, dn


def jacobi_sn(x: ArrayLike, k: float) -> NDArray[np.float64]:
    return jacobi_sn_cn_dn(x, k)[0]


def jacobi_cn(x: ArrayLike, k: float) -> NDArray[np.float64]:
    return jacobi_sn_cn_dn(x, k)[1]


class CrossingOracleParams(BaseModel):
    """
    Parameters of the closed-form crossing trajectory started at ``(z - p) / (1 - conj(p) z)``
    with ``alpha = 1``.

    ``a`` and ``b`` are the positive roots of ``ab = |p|^2 (1 - |p|^2)``,
    ``b - a = 5/4 - 2 |p|^2``; the trajectory is ``I(t) = sqrt(a) cn(sqrt(a + b) t + K(k), k)``
    with ``k = sqrt(a / (a + b))``.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    p: complex
    a: float
    b: float

    @classmethod
    def from_p(cls, p: complex) -> "CrossingOracleParams":
        r2 = abs(p) ** 2
        if not 0.0 < r2 < 1.0:
            raise ValueError(f"Blaschke zero must satisfy 0 < |p| < 1, got {p!r}.")
        difference = 1.25 - 2.0 * r2
        product = r2 * (1.0 - r2)
        a = 0.5 * (-difference + math.sqrt(difference * difference + 4.0 * product))
        return cls(p=complex(p), a=a, b=a + difference)

    @model_validator(mode="after")
    def _check_roots(self: Self) -> Self:
        r2 = abs(self.p) ** 2
        if self.a <= 0 or self.b <= 0:
            raise ValueError("a and b must be positive")
        if abs(self.a * self.b - r2 * (1.0 - r2)) > 1e-12 or abs(self.b - self.a - (1.25 - 2.0 * r2)) > 1e-12:
            raise ValueError("a and b do not solve the defining relations")
        return self

    @property
    def modulus(self: Self) -> float:
        return math.sqrt(self.a / (self.a + self.b))

    @property
    def rate(self: Self) -> float:
        return math.sqrt(self.a + self.b)

    @property
    def phase(self: Self) -> float:
        """``F(pi/2, k) = K(k)``."""
        return complete_K(self.modulus)

    @property
    def energy(self: Self) -> float:
        return 0.25 + 0.5 * abs(self.p) ** 2


def crossing_oracle_I(t: ArrayLike, params: CrossingOracleParams) -> NDArray[np.float64]:
    """``I(t) = (rho_1^2 - rho_2^2) / 2`` along the oracle trajectory, ``I(0) = 0``."""
    argument = params.rate * np.asarray(t, dtype=np.float64) + params.phase
    return math.sqrt(params.a) * jacobi_cn(argument, params.modulus)


def crossing_oracle_spectra(
    t: ArrayLike,
    params: CrossingOracleParams,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """``(rho_1^2, rho_2^2) = (1 + I, 1 - I)``."""
    value = crossing_oracle_I(t, params)
    return 1.0 + value, 1.0 - value


def crossing_times(params: CrossingOracleParams, t_max: float) -> list[float]:
    """Zeros ``2 j K / rate`` of ``I`` in ``[0, t_max]``."""
    spacing = 2.0 * params.phase / params.rate
    return [j * spacing for j in range(int(math.floor(t_max / spacing)) + 1)]


def oracle_ode_residual(t: ArrayLike, params: CrossingOracleParams, dt: float = 1e-5) -> NDArray[np.float64]:
    """``(I')^2 - (a - I^2)(b + I^2)`` with a central difference for ``I'``."""
    times = np.asarray(t, dtype=np.float64)
    derivative = (crossing_oracle_I(times + dt, params) - crossing_oracle_I(times - dt, params)) / (2.0 * dt)
    value = crossing_oracle_I(times, params)
    return derivative**2 - (params.a - value**2) * (params.b + value**2)
