"""Light attenuation inside a flat-panel photobioreactor.

The culture is illuminated from one face with a photon flux density q0.
Light decays with depth because the cells absorb and scatter it, so the
local irradiance G(z) depends on the biomass concentration X.  A two-flux
(forward/backward stream) description gives G in closed form for a slab.

Cells grown under dim light are more heavily pigmented than cells grown
under strong light, so the optical cross sections themselves vary with q0.
Log-linear correlations capture that acclimation trend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .kinetics import SimplifiedModelParams

__all__ = [
    "Geometry",
    "OpticalProps",
    "TwoFluxCoeffs",
    "optical_coefficients",
    "two_flux_coeffs",
    "irradiance_at_depth",
    "mean_irradiance_simplified",
]

# Optical acclimation correlations, cross section versus ln(q0 in umol/m2/s).
E_A_LOG_SLOPE = -28.0  # m^2/kg
E_A_INTERCEPT = 337.0  # m^2/kg
E_S_LOG_SLOPE = 28.9  # m^2/kg
E_S_INTERCEPT = 708.0  # m^2/kg
BACKSCATTER_FRACTION = 0.08  # dimensionless

# Below this optical thickness the slab is treated as transparent.
_CLEAR_SLAB_THICKNESS = 1e-12


@dataclass(frozen=True)
class Geometry:
    """Flat-panel vessel geometry."""

    depth: float = 0.05  # light path length, m

    def __post_init__(self) -> None:
        if not self.depth > 0:
            raise ValueError(f"depth must be positive, got {self.depth}")


@dataclass(frozen=True)
class OpticalProps:
    """Mass-specific optical cross sections of the cells."""

    E_a: float  # absorption, m^2/kg
    E_s: float  # scattering, m^2/kg
    b: float = BACKSCATTER_FRACTION  # backward-scattered fraction


@dataclass(frozen=True)
class TwoFluxCoeffs:
    """Slab attenuation parameters for a given biomass concentration."""

    delta: float  # extinction coefficient, 1/m
    alpha: float  # linear scattering modulus, dimensionless


def optical_coefficients(q0: float) -> OpticalProps:
    """Cross sections of cells acclimated to incident light q0 (umol/m2/s).

    Raises ValueError if q0 is non-positive or so large that the absorption
    correlation leaves its validity range (E_a would go non-positive).
    """
    if q0 <= 0:
        raise ValueError(f"q0 must be positive, got {q0}")
    log_q0 = math.log(q0)
    E_a = E_A_LOG_SLOPE * log_q0 + E_A_INTERCEPT
    if E_a <= 0:
        raise ValueError(
            f"q0={q0} outside the validity range of the absorption correlation"
        )
    E_s = E_S_LOG_SLOPE * log_q0 + E_S_INTERCEPT
    return OpticalProps(E_a=E_a, E_s=E_s)


def two_flux_coeffs(X: float, props: OpticalProps) -> TwoFluxCoeffs:
    """Extinction and scattering modulus at biomass concentration X (kg/m3)."""
    if X < 0:
        raise ValueError(f"X must be nonnegative, got {X}")
    diffuse = props.E_a + 2.0 * props.b * props.E_s
    return TwoFluxCoeffs(
        delta=X * math.sqrt(props.E_a * diffuse),
        alpha=math.sqrt(props.E_a / diffuse),
    )


def _slab_profile(z, q0: float, coeffs: TwoFluxCoeffs, depth: float):
    """Two-flux irradiance at depth z for precomputed slab coefficients.

    Written with negative exponents only, so it stays finite for optically
    thick cultures where exp(delta*L) would overflow.
    """
    delta, alpha = coeffs.delta, coeffs.alpha
    if delta * depth < _CLEAR_SLAB_THICKNESS:
        return q0 * np.ones_like(np.asarray(z, dtype=float))
    up = 1.0 + alpha
    down = 1.0 - alpha
    num = up * np.exp(-delta * z) - down * np.exp(-delta * (2.0 * depth - z))
    den = up * up - down * down * math.exp(-2.0 * delta * depth)
    return 2.0 * q0 * num / den


def irradiance_at_depth(
    z,
    X: float,
    q0: float,
    geom: Geometry = Geometry(),
    props: OpticalProps | None = None,
):
    """Local irradiance G(z) in umol/m2/s; z may be a scalar or an array.

    By default the cross sections follow the acclimation correlations at q0;
    pass props explicitly to pin the acclimation state (G is then exactly
    linear in q0, as the two-flux solution is in its boundary flux).
    """
    z = np.asarray(z, dtype=float)
    if np.any(z < 0) or np.any(z > geom.depth):
        raise ValueError("z must lie within [0, depth]")
    if q0 < 0:
        raise ValueError(f"q0 must be nonnegative, got {q0}")
    if q0 == 0:
        out = np.zeros_like(z)
        return float(out) if out.ndim == 0 else out
    coeffs = two_flux_coeffs(X, props if props is not None else optical_coefficients(q0))
    out = _slab_profile(z, q0, coeffs, geom.depth)
    return float(out) if out.ndim == 0 else out


def mean_irradiance_simplified(
    X: float, q0: float, sp: "SimplifiedModelParams", geom: Geometry = Geometry()
) -> float:
    """Depth-averaged irradiance under a single-exponential attenuation law.

    The lumped growth model replaces the two-flux profile by
    G(z) = q0 * exp(-c * X * z) with c = (1 + alpha_hat) / (2 alpha_hat) * E_a_hat,
    whose depth average has the closed form q0 * (1 - exp(-cXL)) / (cXL).
    """
    if X < 0:
        raise ValueError(f"X must be nonnegative, got {X}")
    if q0 < 0:
        raise ValueError(f"q0 must be nonnegative, got {q0}")
    attenuation = (1.0 + sp.alpha_hat) / (2.0 * sp.alpha_hat) * sp.E_a_hat
    thickness = attenuation * X * geom.depth
    if thickness < _CLEAR_SLAB_THICKNESS:
        return float(q0)
    return q0 * (1.0 - math.exp(-thickness)) / thickness
