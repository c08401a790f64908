"""Weak-drive steady state by the excitation ladder, plus a finite-drive oracle.

With the ground amplitude pinned to one, the steady state of
i d|psi>/dt = H |psi> is built manifold by manifold,

    c1 = -H_1^{-1} D_1 c0,    c2 = -H_2^{-1} D_2 c1,   ...

where the scalar drive sqrt(kappa/2) E0 is set to one, so that the physical
amplitudes are ``c_k * s**k`` with ``s = sqrt(kappa/2) E0``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from optoblockade.errors import LosslessResonanceError, NumericError, ParameterDomainError, UndefinedCorrelationError

DEPLETION_LIMIT = 0.1


class DepletionWarning(UserWarning):
    """Excited-state population is too large for the undepleted-ground approximation."""


@dataclass(frozen=True)
class SteadyAmplitudes:
    """Steady-state amplitudes per manifold in the unit-drive convention.

    ``amplitudes[k]`` scales as ``s**k``.  ``drive`` is the scalar s at which a
    finite-drive solve was done, or None for the ladder (E0 -> 0) solution.
    """

    basis: object
    amplitudes: tuple
    drive_prefactor: float
    drive: float | None = None

    @property
    def c0(self):
        return self.amplitudes[0]

    @property
    def c1(self):
        return self.amplitudes[1]

    @property
    def c2(self):
        return self.amplitudes[2]

    def photon_numbers(self, k):
        return self.basis.photon_numbers()[self.basis.manifold_slice(k)]

    def physical(self, s):
        return [c * s**k for k, c in enumerate(self.amplitudes)]


def _solve(matrix, rhs, point):
    with warnings.catch_warnings(), np.errstate(divide="ignore", invalid="ignore"):
        warnings.simplefilter("error", la.LinAlgWarning)
        try:
            x = la.solve(matrix, rhs, check_finite=False)
        except (la.LinAlgError, la.LinAlgWarning) as exc:
            raise LosslessResonanceError(f"singular manifold block ({exc})", point) from None
    if not np.all(np.isfinite(x)):
        raise LosslessResonanceError("singular manifold block (undamped resonance)", point)
    return x


def _ground(basis):
    c0 = np.zeros(basis.manifold_slice(0).stop - basis.manifold_slice(0).start, dtype=complex)
    c0[0] = 1.0  # |0 photons, g, 0 phonons>: motion starts in its ground state
    return c0


def solve_weak_drive(blocks):
    """Order-by-order amplitudes c_k = -H_k^{-1} D_k c_{k-1} at unit drive."""
    amps = [_ground(blocks.basis)]
    for k in range(1, blocks.n_max + 1):
        amps.append(-_solve(blocks.H[k], blocks.D[k] @ amps[-1], blocks.point))
    if not all(np.all(np.isfinite(c)) for c in amps):
        raise NumericError("non-finite steady-state amplitudes", blocks.point)
    return SteadyAmplitudes(blocks.basis, tuple(amps), blocks.drive_prefactor)


def solve_finite_drive(blocks, E0):
    """Direct solve of every manifold at drive E0 with the ground amplitude pinned to one.

    Drive couplings are kept in both directions, so the result differs from
    :func:`solve_weak_drive` at relative order E0**2.  Amplitudes are rescaled
    back to the unit-drive convention.
    """
    if E0 <= 0:
        raise ParameterDomainError(f"finite-drive solve needs E0 > 0, got {E0}")
    s = blocks.drive_scale(E0)
    if s == 0:
        raise ParameterDomainError("finite-drive solve needs kappa > 0")
    basis = blocks.basis
    dim = basis.dim
    full = np.zeros((dim, dim), dtype=complex)
    for k in range(blocks.n_max + 1):
        sl = basis.manifold_slice(k)
        full[sl, sl] = blocks.H[k]
        if k > 0:
            lower = basis.manifold_slice(k - 1)
            full[sl, lower] = s * blocks.D[k]
            full[lower, sl] = s * blocks.D[k].conj().T
    free = np.arange(1, dim)
    x = _solve(full[np.ix_(free, free)], -full[free, 0], blocks.point)
    state = np.concatenate([[1.0 + 0j], x])

    excited = np.sum(np.abs(x) ** 2)
    if excited > DEPLETION_LIMIT:
        warnings.warn(f"excited population {excited:.3g} > {DEPLETION_LIMIT}; ground is depleted", DepletionWarning)
    amps = []
    for k in range(blocks.n_max + 1):
        amps.append(state[basis.manifold_slice(k)] / s**k)
    return SteadyAmplitudes(basis, tuple(amps), blocks.drive_prefactor, drive=s)


def _moments(amps):
    """(norm, <a^dag a>, <a^dag^2 a^2>) of the physical, unnormalised state."""
    norm = n1 = n2 = 0.0
    for k, c in enumerate(amps.physical(amps.drive)):
        p = np.abs(c) ** 2
        n = amps.photon_numbers(k)
        norm += p.sum()
        n1 += (n * p).sum()
        n2 += (n * (n - 1) * p).sum()
    return norm, n1, n2


def g2_zero(amps):
    """Normalised zero-delay correlation <a^dag^2 a^2> / <a^dag a>^2 of the cavity field."""
    if amps.drive is None:
        n = amps.photon_numbers(1)
        one = np.sum(n * np.abs(amps.c1) ** 2)
        n = amps.photon_numbers(2)
        two = np.sum(n * (n - 1) * np.abs(amps.c2) ** 2)
        if one == 0:
            raise UndefinedCorrelationError("cavity field vanishes at first order in the drive")
        return float(two / one**2)
    norm, n1, n2 = _moments(amps)
    if n1 == 0:
        raise UndefinedCorrelationError("cavity field vanishes")
    return float(n2 * norm / n1**2)


def mean_photon(amps, E0=None):
    """Intracavity photon number at drive E0 (defaults to the E0 of a finite-drive solve)."""
    if amps.drive is not None:
        if E0 is not None and not np.isclose(amps.drive_prefactor * E0, amps.drive):
            raise ParameterDomainError("finite-drive amplitudes were solved at a different E0")
        norm, n1, _ = _moments(amps)
        return float(n1 / norm)
    if E0 is None:
        raise ParameterDomainError("mean_photon of ladder amplitudes needs E0")
    s = amps.drive_prefactor * E0
    total = 0.0
    for k in range(1, len(amps.amplitudes)):
        total += s ** (2 * k) * np.sum(amps.photon_numbers(k) * np.abs(amps.amplitudes[k]) ** 2)
    return float(total)
