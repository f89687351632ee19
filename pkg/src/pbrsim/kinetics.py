"""Growth kinetics of the culture.

Two rate models are kept side by side:

* the full model couples the local photosynthetic O2 production rate to the
  two-flux light profile and integrates it over the vessel depth;
* a lumped single-exponential model (Haldane response to the depth-averaged
  irradiance) that the model-based controller uses as its internal plant.

Photon fluxes are per second while the reactor dynamics are written per
hour, so the O2 balance carries an explicit seconds-to-hours conversion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .radiative import (
    Geometry,
    irradiance_at_depth,
    mean_irradiance_simplified,
    optical_coefficients,
)

__all__ = [
    "FullModelParams",
    "SimplifiedModelParams",
    "local_oxygen_rate",
    "mean_oxygen_rate",
    "growth_rate_full",
    "growth_rate_simplified",
    "growth_rate",
    "specific_growth_rate",
]

SECONDS_PER_HOUR = 3600.0


@dataclass(frozen=True)
class FullModelParams:
    """Constants of the radiative/energetic growth description."""

    K: float = 120.0  # photosynthesis half-saturation, umol/m2/s
    K_R: float = 6.0  # respiration inhibition constant, umol/m2/s
    rho_m: float = 0.8  # maximum energetic yield of photon conversion
    phi_prime: float = 1.12e-7  # molar quantum yield, mol O2 / umol photon
    resp_rate: float = 3.19e-4  # dark respiration O2 demand, mol O2/kg/s
    nu_O2_X: float = 1.183  # O2-to-biomass stoichiometric coupling
    M_x: float = 24e-3  # C-molar mass of biomass, kg/C-mol

    def __post_init__(self) -> None:
        for name in (
            "K",
            "K_R",
            "rho_m",
            "phi_prime",
            "resp_rate",
            "nu_O2_X",
            "M_x",
        ):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class SimplifiedModelParams:
    """Constants of the lumped Haldane growth model."""

    mu_0: float = 0.14  # rate scale, 1/h
    mu_r: float = 0.013  # maintenance respiration rate, 1/h
    alpha_hat: float = 0.71  # scattering modulus of the lumped light law
    E_a_hat: float = 151.0  # absorption cross section, m^2/kg
    K_I: float = 120.0  # light half-saturation, umol/m2/s
    K_II: float = 500.0  # photoinhibition constant, umol/m2/s

    def __post_init__(self) -> None:
        for name in ("mu_0", "mu_r", "alpha_hat", "E_a_hat", "K_I", "K_II"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


def local_oxygen_rate(G, E_a: float, p: FullModelParams = FullModelParams()):
    """Net specific O2 rate at local irradiance G, in mol O2/kg/h.

    Photosynthesis saturates with G (half-saturation K) while respiration is
    progressively inhibited by light (constant K_R).  The balance is formed
    on a per-second photon basis and converted to hours.  G may be an array.
    """
    photo = p.rho_m * p.K / (p.K + G) * p.phi_prime * E_a * G
    resp = p.resp_rate * p.K_R / (p.K_R + G)
    return (photo - resp) * SECONDS_PER_HOUR


def _simpson_mean(values: np.ndarray) -> float:
    """Average of uniformly sampled values via composite Simpson weights."""
    n = values.size
    weights = np.ones(n)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    # mean = (h/3) * sum(w*y) / L with h = L/(n-1), so L cancels.
    return float(weights @ values / (3.0 * (n - 1)))


def mean_oxygen_rate(
    X: float,
    q0: float,
    p: FullModelParams = FullModelParams(),
    geom: Geometry = Geometry(),
    n_nodes: int = 101,
) -> float:
    """Depth-averaged net O2 rate in mol O2/kg/h (composite Simpson)."""
    if n_nodes < 3 or n_nodes % 2 == 0:
        raise ValueError(f"n_nodes must be odd and >= 3, got {n_nodes}")
    if X < 0:
        raise ValueError(f"X must be nonnegative, got {X}")
    if q0 < 0:
        raise ValueError(f"q0 must be nonnegative, got {q0}")
    if q0 == 0:
        # Dark culture: uninhibited respiration only.
        return float(-p.resp_rate * SECONDS_PER_HOUR)
    E_a = optical_coefficients(q0).E_a
    z = np.linspace(0.0, geom.depth, n_nodes)
    G = irradiance_at_depth(z, X, q0, geom)
    return _simpson_mean(local_oxygen_rate(G, E_a, p))


def growth_rate_full(
    X: float,
    q0: float,
    p: FullModelParams = FullModelParams(),
    geom: Geometry = Geometry(),
    n_nodes: int = 101,
) -> float:
    """Volumetric biomass growth rate r_X in kg/m3/h under the full model."""
    if X == 0:
        return 0.0
    return mean_oxygen_rate(X, q0, p, geom, n_nodes) * p.M_x * X / p.nu_O2_X


def growth_rate_simplified(
    X: float,
    q0: float,
    sp: SimplifiedModelParams = SimplifiedModelParams(),
    geom: Geometry = Geometry(),
) -> float:
    """Volumetric growth rate in kg/m3/h under the lumped Haldane model."""
    if X < 0:
        raise ValueError(f"X must be nonnegative, got {X}")
    G_bar = mean_irradiance_simplified(X, q0, sp, geom)
    mu = sp.mu_0 * G_bar / (sp.K_I + G_bar + G_bar * G_bar / sp.K_II) - sp.mu_r
    return mu * X


def growth_rate(
    X: float,
    q0: float,
    params: FullModelParams | SimplifiedModelParams,
    geom: Geometry = Geometry(),
    n_nodes: int = 101,
) -> float:
    """Growth rate under either model, dispatched on the parameter type."""
    if isinstance(params, SimplifiedModelParams):
        return growth_rate_simplified(X, q0, params, geom)
    return growth_rate_full(X, q0, params, geom, n_nodes)


def specific_growth_rate(
    X: float,
    q0: float,
    params: FullModelParams | SimplifiedModelParams = FullModelParams(),
    geom: Geometry = Geometry(),
    n_nodes: int = 101,
) -> float:
    """Specific growth rate mu = r_X / X in 1/h; requires X > 0."""
    if X <= 0:
        raise ValueError(f"X must be positive, got {X}")
    if isinstance(params, SimplifiedModelParams):
        G_bar = mean_irradiance_simplified(X, q0, params, geom)
        return (
            params.mu_0 * G_bar / (params.K_I + G_bar + G_bar * G_bar / params.K_II)
            - params.mu_r
        )
    return mean_oxygen_rate(X, q0, params, geom, n_nodes) * params.M_x / params.nu_O2_X
