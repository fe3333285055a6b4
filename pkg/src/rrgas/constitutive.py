"""Constitutive laws for the radiative reacting gas model.

Pressure and internal energy combine a perfect-gas part with a
Stefan-Boltzmann radiation part; the reaction rate is an Arrhenius law
with a power-law density factor; the heat conductivity is a power law
in temperature with an optional specific-volume factor (model B).

All evaluations accept scalars or numpy arrays and broadcast
elementwise.  Everything is dimensionless (code units).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Temperature floor used only when evaluating conductivity derivatives:
# d(kappa)/d(theta) ~ theta**(q-1) is unbounded at theta=0 for 0 < q < 1.
# Physical states never reach theta = 0, so this guards round-off only.
THETA_DERIV_FLOOR = 1e-10


@dataclass
class PhysParams:
    """Physical and constitutive constants, all in code units."""

    mu: float = 0.1            # viscosity coefficient
    d_diff: float = 0.1        # species diffusion coefficient
    lambda_heat: float = 1.0   # heat release per unit reactant
    cv: float = 1.0            # specific heat at constant volume
    r_gas: float = 1.0         # perfect-gas constant
    a_rad: float = 1.0         # radiation constant
    g_grav: float = 0.0        # gravitational constant
    p_ext: float = 1.0         # external boundary pressure (any sign)
    k_rate: float = 1.0        # Arrhenius prefactor (0 disables the reaction)
    a_act: float = 1.0         # activation temperature
    m_order: float = 1.0       # kinetics order
    beta: float = 0.0          # rate temperature exponent
    q_cond: float = 0.0        # conductivity exponent
    kappa1: float = 1.0        # conductivity lower coefficient
    kappa2: float = 1.0        # conductivity upper coefficient
    cond_model: str = "A"      # "A": kappa1 + kappa2*theta^q; "B": kappa1 + kappa2*v*theta^q

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        """Check every bound and raise one error listing all violations."""
        problems = []
        for name in ("mu", "d_diff", "cv", "r_gas", "a_rad", "a_act"):
            if not getattr(self, name) > 0.0:
                problems.append(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ("lambda_heat", "k_rate", "beta", "q_cond"):
            if not getattr(self, name) >= 0.0:
                problems.append(f"{name} must be >= 0, got {getattr(self, name)}")
        if not self.g_grav >= 0.0:
            problems.append(f"g_grav must be >= 0, got {self.g_grav}")
        if not self.m_order >= 1.0:
            problems.append(f"m_order must be >= 1, got {self.m_order}")
        if not 0.0 < self.kappa1 <= self.kappa2:
            problems.append(
                f"conductivity coefficients need 0 < kappa1 <= kappa2, "
                f"got kappa1={self.kappa1}, kappa2={self.kappa2}"
            )
        if self.cond_model not in ("A", "B"):
            problems.append(f"cond_model must be 'A' or 'B', got {self.cond_model!r}")
        if not np.isfinite(self.p_ext):
            problems.append(f"p_ext must be finite, got {self.p_ext}")
        if problems:
            raise ValueError("invalid physical parameters: " + "; ".join(problems))

    @property
    def rate_exponent_supported(self) -> bool:
        """True when beta < q_cond + 9, the exponent range with known global regularity.

        Outside this (open) range runs are permitted but flagged: the model
        may develop singularities the scheme can only report, not prevent.
        """
        return self.beta < self.q_cond + 9.0


def _check_volume(v: np.ndarray) -> None:
    if not np.all(np.isfinite(v)) or np.any(v <= 0.0):
        raise ValueError("specific volume must be finite and > 0")


def pressure(v, theta, params: PhysParams):
    """Total pressure R*theta/v + (a/3)*theta^4."""
    v = np.asarray(v, dtype=float)
    theta = np.asarray(theta, dtype=float)
    _check_volume(v)
    p = params.r_gas * theta / v + (params.a_rad / 3.0) * theta**4
    return p if p.ndim else float(p)


def internal_energy(v, theta, params: PhysParams):
    """Internal energy per unit mass, C_v*theta + a*v*theta^4."""
    v = np.asarray(v, dtype=float)
    theta = np.asarray(theta, dtype=float)
    _check_volume(v)
    e = params.cv * theta + params.a_rad * v * theta**4
    return e if e.ndim else float(e)


def de_dtheta(v, theta, params: PhysParams):
    """Temperature derivative of the internal energy, C_v + 4*a*v*theta^3.

    Bounded below by C_v > 0, so the energy Newton Jacobian is never
    singular.
    """
    v = np.asarray(v, dtype=float)
    theta = np.asarray(theta, dtype=float)
    _check_volume(v)
    et = params.cv + 4.0 * params.a_rad * v * theta**3
    return et if et.ndim else float(et)


def reaction_rate(v, theta, params: PhysParams):
    """Arrhenius rate K * rho^(m-1) * theta^beta * exp(-A/theta), rho = 1/v.

    The theta -> 0 limit is 0 for every beta >= 0 (the exponential
    dominates); it is returned as exactly 0.0 rather than evaluated, which
    would produce 0*inf in floating point.
    """
    v, theta = np.broadcast_arrays(np.asarray(v, dtype=float), np.asarray(theta, dtype=float))
    _check_volume(v)
    rate = np.zeros(theta.shape)
    hot = theta > 0.0
    th = theta[hot]
    rate[hot] = (
        params.k_rate
        * v[hot] ** (1.0 - params.m_order)
        * th**params.beta
        * np.exp(-params.a_act / th)
    )
    return rate if rate.ndim else float(rate)


def conductivity(v, theta, params: PhysParams):
    """Heat conductivity and its partials (kappa, dkappa_dv, dkappa_dtheta).

    Model A: kappa = kappa1 + kappa2 * theta^q       (volume-independent)
    Model B: kappa = kappa1 + kappa2 * v * theta^q

    Derivatives are evaluated at max(theta, THETA_DERIV_FLOOR); see the
    module docstring note on the fractional-exponent limit.
    """
    v, theta = np.broadcast_arrays(np.asarray(v, dtype=float), np.asarray(theta, dtype=float))
    _check_volume(v)
    q = params.q_cond
    theta_q = theta**q
    if q == 0.0:
        dkappa_dtheta = np.zeros(theta.shape)
    else:
        th = np.maximum(theta, THETA_DERIV_FLOOR)
        dkappa_dtheta = q * params.kappa2 * th ** (q - 1.0)
    if params.cond_model == "A":
        kappa = params.kappa1 + params.kappa2 * theta_q
        dkappa_dv = np.zeros(theta.shape)
    else:
        kappa = params.kappa1 + params.kappa2 * v * theta_q
        dkappa_dv = params.kappa2 * theta_q
        dkappa_dtheta = v * dkappa_dtheta
    if kappa.ndim:
        return kappa, dkappa_dv, dkappa_dtheta
    return float(kappa), float(dkappa_dv), float(dkappa_dtheta)
