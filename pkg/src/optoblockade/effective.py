"""Effective optomechanical model left after eliminating the far-detuned atomic excited state.

After adiabatic elimination the cavity sees a position-dependent detuning

    Delta_c(x) = delta_c - L u^2(x),      L = g0^2 delta0 / (delta0^2 + gamma^2/4),

and a position-dependent linewidth kappa(x) = kappa + gamma g0^2 u^2(x) / (delta0^2 + gamma^2/4).
Expanding Delta_c to first order in the zero-point motion gives the photon-phonon
coupling g_eff = L eta_LD sin(2 k_c x0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from optoblockade.errors import ParameterDomainError
from optoblockade.models import JcParams, MotionParams, OmParams


def eta_ld(omega_rec, omega_m):
    """Lamb-Dicke parameter sqrt(omega_rec / omega_m)."""
    if omega_rec <= 0 or omega_m <= 0:
        raise ParameterDomainError(f"eta_ld needs omega_rec > 0 and omega_m > 0, got {omega_rec}, {omega_m}")
    return math.sqrt(omega_rec / omega_m)


def _delta0(params, delta0, dispersive):
    if delta0 is not None:
        return delta0
    return -params.Delta if dispersive else params.delta0


def _lorentz(params, d0):
    """g0^2 / (delta0^2 + gamma^2/4); zero for an uncoupled atom."""
    denom = d0 * d0 + 0.25 * params.gamma**2
    if denom == 0:
        return 0.0 if params.g0 == 0 else math.inf
    return params.g0**2 / denom


def light_shift(params, delta0=None, dispersive=False):
    """Dispersive shift L = g0^2 delta0 / (delta0^2 + gamma^2/4) at an anti-node."""
    d0 = _delta0(params, delta0, dispersive)
    return _lorentz(params, d0) * d0


def g_eff(params, motion, *, delta0=None, dispersive=False):
    """Effective photon-phonon coupling g0^2 delta0/(delta0^2+gamma^2/4) eta_LD sin(2 k_c x0).

    ``dispersive=True`` uses delta0 = -Delta instead of delta_c - Delta.
    """
    return light_shift(params, delta0, dispersive) * motion.eta_ld * math.sin(2.0 * params.kc_x0)


def kappa_eff(params, kc_x0=None, *, delta0=None, dispersive=False):
    """Cavity linewidth broadened by spontaneous emission, at the trap centre."""
    x0 = params.kc_x0 if kc_x0 is None else kc_x0
    d0 = _delta0(params, delta0, dispersive)
    return params.kappa + params.gamma * _lorentz(params, d0) * math.cos(x0) ** 2


def delta_c_dressed(params, kc_x0=None, *, delta0=None, dispersive=False):
    """Position-dependent cavity-laser detuning Delta_c(x0)."""
    x0 = params.kc_x0 if kc_x0 is None else kc_x0
    return params.delta_c - light_shift(params, delta0, dispersive) * math.cos(x0) ** 2


def g_diss(params, motion, *, delta0=None, dispersive=False):
    """Dissipative photon-phonon coupling (eta_LD / 2) d kappa(x) / d(k_c x) at x0.

    It enters the cavity term as -i g_diss (b + b^dag) a^dag a.  Large when
    gamma/2 is comparable to |delta0|.
    """
    d0 = _delta0(params, delta0, dispersive)
    return -0.5 * params.gamma * _lorentz(params, d0) * motion.eta_ld * math.sin(2.0 * params.kc_x0)


def two_level_anharmonicity(params):
    """2 (g0^4/Delta^3) u^4(x0): second-photon shift from the atomic saturation."""
    return 2.0 * params.g0**4 / params.Delta**3 * math.cos(params.kc_x0) ** 4


def motional_anharmonicity(params, motion, **kwargs):
    """2 g_eff^2 / omega_m: second-photon shift from the photon-phonon coupling."""
    return 2.0 * g_eff(params, motion, **kwargs) ** 2 / motion.omega_m


@dataclass(frozen=True)
class EffectiveOmModel:
    g_eff: float
    kappa_eff: float
    delta_c_dressed: float
    eta_ld: float
    # g0 / |Delta|; the mapping is trustworthy only when this is small
    quality: float
    params: JcParams
    motion: MotionParams
    g_diss: float = 0.0

    def om_params(self, dissipative=False):
        """Optomechanical parameters; ``dissipative`` keeps the position dependence of kappa(x).

        -Delta_c(x) a^dag a with Delta_c(x) ~ Delta_c(x0) + g_eff q, so in the
        +g_m q a^dag a convention of the optomechanical model g_m = -g_eff.
        The dissipative part makes g_m complex: g_m = -g_eff - i g_diss.
        """
        g_m = -self.g_eff - 1j * self.g_diss if dissipative else -self.g_eff
        return OmParams(
            omega_m=self.motion.omega_m,
            kappa=self.kappa_eff,
            g_m0=abs(self.g_eff),
            kc_x0=self.params.kc_x0,
            delta_c=self.delta_c_dressed,
            drive_E0=self.params.drive_E0,
            g_m=g_m,
        )


def effective_model(params, motion, *, dispersive=False):
    return EffectiveOmModel(
        g_eff=g_eff(params, motion, dispersive=dispersive),
        kappa_eff=kappa_eff(params, dispersive=dispersive),
        delta_c_dressed=delta_c_dressed(params, dispersive=dispersive),
        eta_ld=motion.eta_ld,
        quality=params.g0 / abs(params.Delta) if params.Delta else math.inf,
        params=params,
        motion=motion,
        g_diss=g_diss(params, motion, dispersive=dispersive),
    )


def map_to_effective_om(params, motion, *, dispersive=False, dissipative=False):
    """Optomechanical parameters (g_m -> g_eff, kappa -> kappa_eff, delta_c -> Delta_c(x0)).

    The plain mapping keeps only the dispersive coupling.  With
    ``dissipative=True`` the coupling also carries -i g_diss; only numeric
    spectra are meaningful for such complex couplings.
    """
    return effective_model(params, motion, dispersive=dispersive).om_params(dissipative)
