"""Truncated product bases |n photons, atom level, m phonons> and their operators.

The basis factorises as (internal configuration) x (phonon number).  Internal
configurations are ordered by excitation manifold, then by photon number
descending, so with an atom and ``n_max = 2`` they read

    |0,g>,  |1,g>, |0,e>,  |2,g>, |1,e>

and each one owns a contiguous run of ``m_max + 1`` phonon states.  Every
excitation manifold is therefore a contiguous slice of the full basis, which is
what lets the models hand the solver dense per-manifold blocks.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from optoblockade.errors import ParameterDomainError, TruncationError

GUARD_LEVELS = 10
TRUNC_TOL = 1e-6


class ExpansionOrder(enum.Enum):
    """Order at which the cavity mode profile cos(k_c x) is expanded about the trap centre."""

    LINEAR = "linear"
    QUADRATIC = "quadratic"
    EXACT = "exact"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ParameterDomainError(
                f"unknown expansion order {value!r}; expected one of {[o.value for o in cls]}"
            ) from None


@dataclass(frozen=True)
class TruncatedBasis:
    has_atom: bool
    n_max: int
    m_max: int
    configs: tuple = field(init=False, repr=False)
    states: tuple = field(init=False, repr=False)

    def __post_init__(self):
        configs = [(0, "g" if self.has_atom else None)]
        for k in range(1, self.n_max + 1):
            configs.append((k, "g" if self.has_atom else None))
            if self.has_atom:
                configs.append((k - 1, "e"))
        states = tuple((n, s, m) for n, s in configs for m in range(self.m_max + 1))
        object.__setattr__(self, "configs", tuple(configs))
        object.__setattr__(self, "states", states)

    @property
    def n_phonon(self):
        return self.m_max + 1

    @property
    def dim(self):
        return len(self.states)

    @staticmethod
    def manifold_of(state):
        n, s, _ = state
        return n + (1 if s == "e" else 0)

    def manifold_slice(self, k):
        """Slice of the full basis spanning excitation manifold ``k``."""
        if not 0 <= k <= self.n_max:
            raise ParameterDomainError(f"manifold {k} outside 0..{self.n_max}")
        width = 1 if (k == 0 or not self.has_atom) else 2
        start = 0 if k == 0 else (1 + (2 if self.has_atom else 1) * (k - 1))
        return slice(start * self.n_phonon, (start + width) * self.n_phonon)

    def manifold_states(self, k):
        return self.states[self.manifold_slice(k)]

    def index(self, state):
        n, s, m = state
        if not 0 <= m <= self.m_max:
            raise KeyError(state)
        return self.configs.index((n, s)) * self.n_phonon + m

    def photon_numbers(self):
        return np.array([n for n, _, _ in self.states], dtype=float)

    @staticmethod
    def label(state):
        n, s, m = state
        if s is None:
            return f"|{n}c,{m}m>"
        return f"|{s},{n}c,{m}m>"


def build_basis(n_max, m_max, has_atom):
    """Enumerate the truncated basis; manifolds above ``n_max`` are dropped."""
    if int(n_max) != n_max or n_max < 1:
        raise ParameterDomainError(f"n_max must be an integer >= 1, got {n_max!r}")
    if int(m_max) != m_max or m_max < 0:
        raise ParameterDomainError(f"m_max must be an integer >= 0, got {m_max!r}")
    return TruncatedBasis(bool(has_atom), int(n_max), int(m_max))


def phonon_lowering(m_max):
    """Dense annihilation operator b on phonon levels 0..m_max."""
    return np.diag(np.sqrt(np.arange(1, m_max + 1, dtype=float)), 1).astype(complex)


def phonon_position(m_max):
    """Dimensionless position q = b + b^dag on phonon levels 0..m_max."""
    b = phonon_lowering(m_max)
    return b + b.conj().T


def _internal_operator(basis, rule):
    """Sparse matrix on internal configurations: ``rule(n, s)`` -> (target config, amplitude) or None."""
    nc = len(basis.configs)
    rows, cols, vals = [], [], []
    for j, (n, s) in enumerate(basis.configs):
        hit = rule(n, s)
        if hit is None:
            continue
        target, amp = hit
        if target in basis.configs:
            rows.append(basis.configs.index(target))
            cols.append(j)
            vals.append(amp)
    return sp.csr_matrix((np.asarray(vals, dtype=complex), (rows, cols)), shape=(nc, nc))


@dataclass(frozen=True)
class OperatorSet:
    """Elementary operators as sparse complex matrices over a :class:`TruncatedBasis`."""

    basis: TruncatedBasis
    a: sp.csr_matrix
    b: sp.csr_matrix
    q: sp.csr_matrix
    n_photon: sp.csr_matrix
    n_phonon: sp.csr_matrix
    sigma_ge: sp.csr_matrix | None
    sigma_ee: sp.csr_matrix | None

    def on_phonons(self, op):
        """Embed a phonon-factor matrix into the full basis."""
        return sp.kron(sp.identity(len(self.basis.configs), format="csr"), sp.csr_matrix(op), format="csr")

    def u_op(self, order, kc_x0, eta_ld, **kwargs):
        return self.on_phonons(mode_profile_operator(self.basis, order, kc_x0, eta_ld, **kwargs))


def build_operators(basis):
    """Photon, phonon and atomic operators on ``basis``."""
    ident_ph = sp.identity(basis.n_phonon, format="csr", dtype=complex)
    ident_int = sp.identity(len(basis.configs), format="csr", dtype=complex)

    a_int = _internal_operator(basis, lambda n, s: ((n - 1, s), np.sqrt(n)) if n > 0 else None)
    a = sp.kron(a_int, ident_ph, format="csr")
    b = sp.kron(ident_int, sp.csr_matrix(phonon_lowering(basis.m_max)), format="csr")
    q = (b + b.conj().T).tocsr()
    n_photon = sp.kron(sp.diags([float(n) for n, _ in basis.configs]), ident_ph, format="csr")
    n_phonon = sp.kron(ident_int, sp.diags(np.arange(basis.n_phonon, dtype=float)), format="csr")
    sigma_ge = sigma_ee = None
    if basis.has_atom:
        s_int = _internal_operator(basis, lambda n, s: ((n, "g"), 1.0) if s == "e" else None)
        sigma_ge = sp.kron(s_int, ident_ph, format="csr")
        sigma_ee = sp.kron(sp.diags([1.0 if s == "e" else 0.0 for _, s in basis.configs]), ident_ph, format="csr")
    return OperatorSet(basis, a, b, q, n_photon.astype(complex), n_phonon.astype(complex), sigma_ge, sigma_ee)


def _exact_profile(m_max, kc_x0, eta_ld, guard):
    q_big = phonon_position(m_max + guard).real
    evals, evecs = np.linalg.eigh(q_big)
    # cos(k_c x0) cos(eta q) - sin(k_c x0) sin(eta q) = cos(k_c x0 + eta q)
    profile = (evecs * np.cos(kc_x0 + eta_ld * evals)) @ evecs.T
    return profile[: m_max + 1, : m_max + 1]


def mode_profile_operator(basis, order, kc_x0, eta_ld, *, guard=GUARD_LEVELS, trunc_tol=TRUNC_TOL):
    """Phonon-factor matrix of the mode amplitude u(x) = cos(k_c x0 + eta_ld q).

    ``Linear`` and ``Quadratic`` are Taylor expansions about the trap centre.
    ``Exact`` applies the cosine to the spectrum of q built on ``guard`` extra
    phonon levels and projects back; if doubling the guard band changes any
    retained element by more than ``trunc_tol`` a :class:`TruncationError` is
    raised.
    """
    order = ExpansionOrder.parse(order)
    if eta_ld < 0:
        raise ParameterDomainError(f"eta_ld must be >= 0, got {eta_ld}")
    m_max = basis.m_max if isinstance(basis, TruncatedBasis) else int(basis)
    c, s = np.cos(kc_x0), np.sin(kc_x0)
    ident = np.eye(m_max + 1)

    if order is ExpansionOrder.LINEAR:
        return (c * ident - s * eta_ld * phonon_position(m_max).real).astype(complex)
    if order is ExpansionOrder.QUADRATIC:
        q = phonon_position(m_max).real
        q_up = phonon_position(m_max + 1).real
        q2 = (q_up @ q_up)[: m_max + 1, : m_max + 1]  # exact (b+b^dag)^2 elements, incl. the top level
        return (c * ident - s * eta_ld * q - 0.5 * c * eta_ld**2 * q2).astype(complex)

    profile = _exact_profile(m_max, kc_x0, eta_ld, guard)
    if eta_ld > 0:
        err = np.max(np.abs(profile - _exact_profile(m_max, kc_x0, eta_ld, 2 * guard)))
        if err > trunc_tol:
            raise TruncationError(
                f"exact mode profile not converged: eta_ld*sqrt(m_max) = {eta_ld * np.sqrt(m_max):.3g}, "
                f"guard {guard} levels, deviation {err:.2e} > {trunc_tol:.1e}"
            )
    return profile.astype(complex)
