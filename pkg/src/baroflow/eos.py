"""Power-law pressure law for a barotropic fluid and its pressure potential."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class PositivityError(ValueError):
    """Raised when a density field stops being positive where it must be."""

    def __init__(self, message: str, value: float | None = None,
                 where: str | None = None, t: float | None = None):
        parts = [message]
        if value is not None:
            parts.append(f"min value {value:.6g}")
        if where is not None:
            parts.append(f"at {where}")
        if t is not None:
            parts.append(f"t={t:.6g}")
        super().__init__(", ".join(parts))
        self.value = value
        self.where = where
        self.t = t


def _check_positive(rho, where: str | None):
    bad = np.asarray(rho) <= 0.0
    if np.any(bad):
        raise PositivityError("non-positive density", value=float(np.min(rho)), where=where)


@dataclass(frozen=True)
class BarotropicEOS:
    """Pressure law p = a * rho**gamma with pressure potential
    Pi = a * rho**gamma / (gamma - 1).

    The potential satisfies rho * Pi'(rho) - Pi(rho) = p(rho), and for
    a > 0, gamma > 1 both dp/drho and d2Pi/drho2 are positive for rho > 0,
    which the dissipative time stepping relies on.
    """

    a: float = 1.0
    gamma: float = 1.4

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"pressure coefficient a must be positive, got {self.a}")
        if not self.gamma > 1:
            raise ValueError(f"adiabatic exponent gamma must exceed 1, got {self.gamma}")

    def pressure(self, rho, where: str | None = None):
        _check_positive(rho, where)
        return self.a * np.power(rho, self.gamma)

    def potential(self, rho, where: str | None = None):
        _check_positive(rho, where)
        return self.a * np.power(rho, self.gamma) / (self.gamma - 1.0)

    def potential_derivative(self, rho, where: str | None = None):
        _check_positive(rho, where)
        return self.a * self.gamma / (self.gamma - 1.0) * np.power(rho, self.gamma - 1.0)

    def pressure_derivatives(self, rho, where: str | None = None):
        """(dp/drho, d2p/drho2); the first is positive for all admissible rho."""
        _check_positive(rho, where)
        a, g = self.a, self.gamma
        return a * g * np.power(rho, g - 1.0), a * g * (g - 1.0) * np.power(rho, g - 2.0)
