"""Non-Hermitian Hamiltonians of the three models, split into excitation-manifold blocks.

All Hamiltonians are written in the frame rotating at the laser frequency, with
cavity and atomic losses kept inside H as -i kappa/2 a^dag a and
-i gamma/2 sigma_ee.  The drive sqrt(kappa/2) E0 (a + a^dag) only couples
neighbouring manifolds; it is stored as the unit-amplitude blocks ``D[k]``
(a^dag from manifold k-1 to k) together with the scalar ``drive_prefactor``
sqrt(kappa/2).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from optoblockade.errors import ParameterDomainError
from optoblockade.fockspace import (
    GUARD_LEVELS,
    TRUNC_TOL,
    ExpansionOrder,
    TruncatedBasis,
    build_basis,
    build_operators,
    mode_profile_operator,
)


def _require(cond, message):
    if not cond:
        raise ParameterDomainError(message)


@dataclass(frozen=True)
class OmParams:
    """Membrane-type optomechanics: a cavity whose frequency follows cos^2(k_c x)."""

    omega_m: float
    kappa: float
    g_m0: float = 0.0
    kc_x0: float = math.pi / 4
    delta_c: float = 0.0
    drive_E0: float = 0.0
    # Direct photon-phonon coupling; overrides g_m0 sin(2 kc_x0) when set.
    g_m: float | None = None

    def __post_init__(self):
        _require(self.omega_m > 0, f"omega_m must be > 0, got {self.omega_m}")
        _require(self.kappa >= 0, f"kappa must be >= 0, got {self.kappa}")
        _require(self.g_m0 >= 0, f"g_m0 must be >= 0, got {self.g_m0}")

    @property
    def coupling(self):
        return gm_of_x0(self.g_m0, self.kc_x0) if self.g_m is None else self.g_m


@dataclass(frozen=True)
class JcParams:
    """Two-level atom in a single cavity mode; ``Delta`` is omega_0 - omega_c."""

    g0: float
    kappa: float
    gamma: float
    Delta: float
    delta_c: float = 0.0
    kc_x0: float = 0.0
    drive_E0: float = 0.0

    def __post_init__(self):
        _require(self.g0 >= 0, f"g0 must be >= 0, got {self.g0}")
        _require(self.kappa >= 0, f"kappa must be >= 0, got {self.kappa}")
        _require(self.gamma >= 0, f"gamma must be >= 0, got {self.gamma}")

    @property
    def delta0(self):
        """Laser-atom detuning omega_L - omega_0."""
        return self.delta_c - self.Delta


@dataclass(frozen=True)
class MotionParams:
    omega_m: float
    omega_rec: float
    expansion_order: ExpansionOrder = ExpansionOrder.LINEAR
    m_max: int = 16
    guard: int = GUARD_LEVELS
    trunc_tol: float = TRUNC_TOL

    def __post_init__(self):
        _require(self.omega_m > 0, f"omega_m must be > 0, got {self.omega_m}")
        _require(self.omega_rec >= 0, f"omega_rec must be >= 0, got {self.omega_rec}")
        _require(int(self.m_max) == self.m_max and self.m_max >= 0, f"m_max must be an integer >= 0, got {self.m_max}")
        object.__setattr__(self, "expansion_order", ExpansionOrder.parse(self.expansion_order))

    @property
    def eta_ld(self):
        return math.sqrt(self.omega_rec / self.omega_m)


@dataclass(frozen=True)
class HamiltonianBlocks:
    """Manifold blocks ``H[k]`` (k = 0..n_max) and drive blocks ``D[k]`` (k-1 -> k; ``D[0]`` is None)."""

    basis: TruncatedBasis
    H: tuple
    D: tuple
    drive_prefactor: float
    drive_E0: float
    delta_c: float
    hamiltonian: sp.csr_matrix = field(repr=False)
    creation: sp.csr_matrix = field(repr=False)
    model: str = ""
    point: dict = field(default_factory=dict, repr=False)

    @property
    def n_max(self):
        return self.basis.n_max

    def drive_scale(self, E0=None):
        """Scalar drive amplitude sqrt(kappa/2) E0."""
        return self.drive_prefactor * (self.drive_E0 if E0 is None else E0)


@functools.lru_cache(maxsize=64)
def _operators(basis):
    return build_operators(basis)


def _split(basis, hamiltonian, adag, *, drive_prefactor, drive_E0, delta_c, model, point):
    H, D = [], [None]
    hamiltonian = hamiltonian.tocsr()
    for k in range(basis.n_max + 1):
        sl = basis.manifold_slice(k)
        H.append(hamiltonian[sl, sl].toarray())
        if k > 0:
            D.append(adag[sl, basis.manifold_slice(k - 1)].toarray())
    return HamiltonianBlocks(
        basis=basis,
        H=tuple(H),
        D=tuple(D),
        drive_prefactor=drive_prefactor,
        drive_E0=drive_E0,
        delta_c=delta_c,
        hamiltonian=hamiltonian,
        creation=adag,
        model=model,
        point=point,
    )


def gm_of_x0(g_m0, kc_x0):
    """Photon-phonon coupling at equilibrium position ``kc_x0`` for a cos^2 intensity profile."""
    return g_m0 * math.sin(2.0 * kc_x0)


def build_om(params, basis):
    """omega_m b^dag b - (delta_c + i kappa/2) a^dag a + g_m (b + b^dag) a^dag a."""
    if basis.has_atom:
        raise ParameterDomainError("optomechanical model needs a basis without atom")
    ops = _operators(basis)
    adag = ops.a.conj().T.tocsr()
    h = (
        params.omega_m * ops.n_phonon
        - (params.delta_c + 0.5j * params.kappa) * ops.n_photon
        + params.coupling * (ops.q @ ops.n_photon)
    )
    return _split(
        basis,
        h,
        adag,
        drive_prefactor=math.sqrt(params.kappa / 2),
        drive_E0=params.drive_E0,
        delta_c=params.delta_c,
        model="om",
        point=dict(vars(params)),
    )


def _jc_terms(params, ops):
    adag = ops.a.conj().T.tocsr()
    exchange = adag @ ops.sigma_ge
    exchange = exchange + exchange.conj().T
    bare = -(params.delta0 + 0.5j * params.gamma) * ops.sigma_ee - (params.delta_c + 0.5j * params.kappa) * ops.n_photon
    return adag, exchange.tocsr(), bare


def build_jc_static(params, basis):
    """Jaynes-Cummings model of an infinitely tightly trapped atom at ``kc_x0``."""
    if not basis.has_atom:
        raise ParameterDomainError("Jaynes-Cummings model needs a basis with atom")
    if basis.m_max != 0:
        raise ParameterDomainError(f"static Jaynes-Cummings model needs m_max = 0, got {basis.m_max}")
    ops = _operators(basis)
    adag, exchange, bare = _jc_terms(params, ops)
    h = bare + params.g0 * math.cos(params.kc_x0) * exchange
    return _split(
        basis,
        h,
        adag,
        drive_prefactor=math.sqrt(params.kappa / 2),
        drive_E0=params.drive_E0,
        delta_c=params.delta_c,
        model="jc-static",
        point=dict(vars(params)),
    )


def build_jc_motion(params, motion, basis=None):
    """omega_m b^dag b + H_JC with the coupling g0 u(x) promoted to an operator on the phonons."""
    if basis is None:
        basis = build_basis(2, motion.m_max, True)
    if not basis.has_atom:
        raise ParameterDomainError("Jaynes-Cummings model needs a basis with atom")
    if basis.m_max < 1:
        raise ParameterDomainError(f"moving atom needs m_max >= 1, got {basis.m_max}")
    ops = _operators(basis)
    adag, exchange, bare = _jc_terms(params, ops)
    u = mode_profile_operator(
        basis, motion.expansion_order, params.kc_x0, motion.eta_ld, guard=motion.guard, trunc_tol=motion.trunc_tol
    )
    # u acts on phonons only and commutes with the internal exchange operator
    coupling = exchange @ ops.on_phonons(u)
    h = motion.omega_m * ops.n_phonon + bare + params.g0 * coupling
    point = dict(vars(params))
    point.update(omega_m=motion.omega_m, omega_rec=motion.omega_rec, expansion_order=motion.expansion_order.value)
    return _split(
        basis,
        h,
        adag,
        drive_prefactor=math.sqrt(params.kappa / 2),
        drive_E0=params.drive_E0,
        delta_c=params.delta_c,
        model="jc-motion",
        point=point,
    )


def static_basis(n_max=2):
    return build_basis(n_max, 0, True)

