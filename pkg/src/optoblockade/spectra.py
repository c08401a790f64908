"""Closed-form level formulas, numerical manifold spectra and resonance tracking.

All closed-form energies are quoted relative to n omega_c, i.e. they are
E_{n,m} - n omega_c.  In the rotating frame the manifold-n block has eigenvalues
(E - n omega_c) - n delta_c (minus i times the loss), so the laser sits on a
single-excitation resonance when delta_c equals the real part of the undriven
manifold-1 eigenvalue computed at delta_c = 0.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from optoblockade import effective
from optoblockade.errors import MixedStateError, NumericError, ParameterDomainError
from optoblockade.fockspace import TruncatedBasis, build_basis, mode_profile_operator
from optoblockade.models import build_jc_motion, build_jc_static, build_om

OVERLAP_THRESHOLD = 0.5
ZERO_POINT_LEVELS = 12
MODELS = ("om", "jc-static", "jc-motion", "om-effective")


def om_level(n, m, params):
    """Displaced-oscillator level m omega_m - (g_m^2 / omega_m) n^2."""
    return m * params.omega_m - params.coupling**2 / params.omega_m * n * n


def _branch_sign(branch):
    if branch in ("+", 1, +1.0):
        return 1.0
    if branch in ("-", -1, -1.0):
        return -1.0
    raise ParameterDomainError(f"branch must be '+' or '-', got {branch!r}")


def jc_level(n, branch, params):
    """Dressed Jaynes-Cummings level (Delta +/- sqrt(4 g0^2 u^2 n + Delta^2)) / 2."""
    if n < 1:
        raise ParameterDomainError(f"Jaynes-Cummings doublets need n >= 1, got {n}")
    u2 = math.cos(params.kc_x0) ** 2
    root = math.sqrt(4.0 * params.g0**2 * u2 * n + params.Delta**2)
    return 0.5 * (_branch_sign(branch) * root + params.Delta)


def photon_branch(params):
    """Branch that tends to the bare cavity as g0 -> 0."""
    return "-" if params.Delta >= 0 else "+"


def combined_level(n, m, params, motion, *, dispersive=False):
    """Dispersive, Lamb-Dicke spectrum of the atom-cavity system with motion.

    m omega_m + (-(g0^2/Delta) u^2) n + ((g0^4/Delta^3) u^4 - g_eff^2/omega_m) n^2
    """
    u2 = math.cos(params.kc_x0) ** 2
    g = effective.g_eff(params, motion, dispersive=dispersive)
    linear = -params.g0**2 / params.Delta * u2
    quadratic = params.g0**4 / params.Delta**3 * u2 * u2 - g * g / motion.omega_m
    return m * motion.omega_m + linear * n + quadratic * n * n


@dataclass(frozen=True)
class SpectrumResult:
    """Undriven spectrum of one excitation manifold.

    ``eigenvalues`` are rotating-frame values; ``levels`` add back k delta_c so
    that Re(levels) is E - k omega_c.
    """

    manifold: int
    eigenvalues: np.ndarray
    levels: np.ndarray
    eigenvectors: np.ndarray
    states: tuple
    overlaps: np.ndarray
    labels: tuple


def _describe(state, has_atom):
    label = TruncatedBasis.label(state)
    if not has_atom:
        return label
    return ("atom-like " if state[1] == "e" else "photon-like ") + label


def numeric_manifold_spectrum(blocks, k):
    """Diagonalise H_k and label every eigenvector by its dominant basis state."""
    try:
        evals, evecs = np.linalg.eig(blocks.H[k])
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver failed on manifold {k} ({exc})", blocks.point) from None
    evecs = evecs / np.linalg.norm(evecs, axis=0)
    order = np.lexsort((evals.imag, evals.real))
    evals, evecs = evals[order], evecs[:, order]
    weights = np.abs(evecs) ** 2
    dominant = np.argmax(weights, axis=0)
    overlaps = weights[dominant, np.arange(len(evals))]
    states = blocks.basis.manifold_states(k)
    labels = tuple(
        _describe(states[i], blocks.basis.has_atom) if w >= OVERLAP_THRESHOLD else "mixed"
        for i, w in zip(dominant, overlaps)
    )
    return SpectrumResult(k, evals, evals + k * blocks.delta_c, evecs, states, overlaps, labels)


def resonance_from_blocks(blocks, sideband=0):
    """(delta_c, overlap) of the manifold-1 eigenstate closest to one photon plus ``sideband`` phonons.

    ``blocks`` must have been built at delta_c = 0.
    """
    has_atom = blocks.basis.has_atom
    target = (1, "g" if has_atom else None, sideband)
    states = blocks.basis.manifold_states(1)
    if target not in states:
        raise ParameterDomainError(f"sideband {sideband} exceeds m_max = {blocks.basis.m_max}")
    row = states.index(target)
    evals, evecs = np.linalg.eig(blocks.H[1])
    weights = np.abs(evecs[row]) ** 2 / np.sum(np.abs(evecs) ** 2, axis=0)
    best = int(np.argmax(weights))
    return float(evals[best].real), float(weights[best])


def _fixed_point(update, start=0.0, iterations=100):
    value = start
    for _ in range(iterations):
        new = update(value)
        if abs(new - value) <= 1e-15 * max(1.0, abs(new)):
            return new
        value = new
    return value


def _analytic(model, params, motion, sideband, dispersive):
    if model == "om":
        return sideband * params.omega_m - params.coupling**2 / params.omega_m
    if model == "jc-static":
        if sideband:
            raise ParameterDomainError("the static Jaynes-Cummings model has no motional sidebands")
        return jc_level(1, photon_branch(params), params)

    u2 = math.cos(params.kc_x0) ** 2
    u2_shift = u2
    if model == "jc-motion":
        # The dispersive shift sees u^2 averaged over the motional ground state.
        u = mode_profile_operator(ZERO_POINT_LEVELS, motion.expansion_order, params.kc_x0, motion.eta_ld)
        u2_shift = float(np.sum(np.abs(u[0]) ** 2))

    def shifted(delta_c):
        p = dataclasses.replace(params, delta_c=delta_c)
        d0 = -p.Delta if dispersive else p.delta0
        g = effective.g_eff(p, motion, delta0=d0)
        value = sideband * motion.omega_m + effective.light_shift(p, d0) * u2_shift - g * g / motion.omega_m
        if model == "jc-motion":
            value += p.g0**4 / p.Delta**3 * u2 * u2
        return value

    return _fixed_point(shifted)


DEFAULT_M_MAX = 16


def build_model(model, params, motion=None, *, n_max=2, m_max=None):
    """Blocks of ``model``; the phonon cutoff defaults to ``motion.m_max`` (or 16 without motion)."""
    if m_max is None:
        m_max = motion.m_max if motion is not None else DEFAULT_M_MAX
    if model == "om":
        return build_om(params, build_basis(n_max, m_max, False))
    if model == "jc-static":
        return build_jc_static(params, build_basis(n_max, 0, True))
    if model == "jc-motion":
        return build_jc_motion(params, motion, build_basis(n_max, m_max, True))
    if model == "om-effective":
        return build_om(effective.map_to_effective_om(params, motion), build_basis(n_max, m_max, False))
    raise ParameterDomainError(f"unknown model {model!r}; expected one of {MODELS}")


def zpl_detuning(model, params, motion=None, mode="numeric", *, sideband=0, m_max=None, dispersive=False):
    """Laser-cavity detuning delta_c that drives the zero-phonon line (or phonon sideband ``sideband``).

    ``mode="numeric"`` diagonalises manifold 1 and follows the eigenstate with
    the largest overlap with |1 photon, g, sideband phonons>; it raises
    :class:`MixedStateError` when that overlap is below 0.5.  ``"analytic"``
    uses the closed-form spectra (exact for the optomechanical model).
    """
    if model not in MODELS:
        raise ParameterDomainError(f"unknown model {model!r}; expected one of {MODELS}")
    mode = str(mode).lower()
    if mode == "analytic":
        return _analytic(model, params, motion, sideband, dispersive)
    if mode != "numeric":
        raise ParameterDomainError(f"unknown ZPL mode {mode!r}; expected 'numeric' or 'analytic'")
    if model == "om-effective":
        # The effective detuning Delta_c(x0) depends on delta_c through delta0.
        def shifted(delta_c):
            p = dataclasses.replace(params, delta_c=delta_c)
            om = dataclasses.replace(effective.map_to_effective_om(p, motion), delta_c=0.0)
            res, overlap = resonance_from_blocks(build_model("om", om, motion, m_max=m_max), sideband)
            if overlap < OVERLAP_THRESHOLD:
                raise MixedStateError(f"no eigenstate >= {OVERLAP_THRESHOLD} on target (best {overlap:.3f})", overlap)
            return res + effective.light_shift(p, dispersive=dispersive) * math.cos(p.kc_x0) ** 2

        return _fixed_point(shifted)
    zero = dataclasses.replace(params, delta_c=0.0)
    delta_c, overlap = resonance_from_blocks(build_model(model, zero, motion, m_max=m_max), sideband)
    if overlap < OVERLAP_THRESHOLD:
        raise MixedStateError(
            f"no manifold-1 eigenstate has overlap >= {OVERLAP_THRESHOLD} with the target (best {overlap:.3f})",
            overlap,
        )
    return delta_c

