import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from optoblockade import effective
from optoblockade.errors import ParameterDomainError
from optoblockade.fockspace import build_basis
from optoblockade.models import JcParams, MotionParams, build_om
from optoblockade.solver import g2_zero, solve_weak_drive
from optoblockade.spectra import build_model, zpl_detuning
from optoblockade.units import khz, mhz

CA = JcParams(g0=mhz(1.4), kappa=mhz(0.05), gamma=mhz(11), Delta=12 * mhz(1.4), kc_x0=math.pi / 3)
CA_MOTION = MotionParams(omega_m=mhz(0.1), omega_rec=khz(6.8))


def test_eta_ld():
    assert effective.eta_ld(khz(6.8), mhz(0.1)) == pytest.approx(math.sqrt(0.068))
    assert CA_MOTION.eta_ld == pytest.approx(effective.eta_ld(khz(6.8), mhz(0.1)))
    with pytest.raises(ParameterDomainError):
        effective.eta_ld(0.0, 1.0)


def test_light_shift_limits():
    p = dataclasses.replace(CA, gamma=0.0)
    assert effective.light_shift(p, dispersive=True) == pytest.approx(-p.g0**2 / p.Delta)
    assert effective.light_shift(dataclasses.replace(CA, g0=0.0)) == 0.0
    # gamma >> delta0: shift suppressed by delta0 / (gamma^2/4)
    p = JcParams(g0=1.0, kappa=0.1, gamma=100.0, Delta=-0.5)
    assert effective.light_shift(p) == pytest.approx(0.5 / 2500.0, rel=1e-4)


def test_uncoupled_atom_limits():
    p = dataclasses.replace(CA, g0=0.0, delta_c=0.2)
    assert effective.g_eff(p, CA_MOTION) == 0.0
    assert effective.kappa_eff(p) == p.kappa
    assert effective.delta_c_dressed(p) == 0.2
    om = effective.map_to_effective_om(p, CA_MOTION)
    assert om.coupling == 0.0 and om.kappa == p.kappa
    assert effective.kappa_eff(dataclasses.replace(CA, gamma=0.0)) == CA.kappa


def test_kappa_eff_excess_follows_intensity():
    d0 = CA.delta0
    factor = CA.gamma * CA.g0**2 / (d0**2 + CA.gamma**2 / 4)
    for x in np.linspace(0, math.pi, 9):
        assert effective.kappa_eff(CA, x) - CA.kappa == pytest.approx(factor * math.cos(x) ** 2, abs=1e-15)


@pytest.mark.parametrize("x0", [0.2, 0.7, math.pi / 3, 1.4])
def test_g_eff_is_derivative_of_dressed_detuning(x0):
    p = dataclasses.replace(CA, kc_x0=x0, delta_c=mhz(-0.05))
    h = 1e-6
    slope = (effective.delta_c_dressed(p, x0 + h) - effective.delta_c_dressed(p, x0 - h)) / (2 * h)
    # Delta_c(x) = delta_c - L cos^2(x) grows along x: eta dDelta_c/d(kc x0) = +g_eff
    assert CA_MOTION.eta_ld * slope == pytest.approx(effective.g_eff(p, CA_MOTION), rel=1e-6)


@settings(max_examples=40, deadline=None)
@given(d=st.floats(-0.7, 0.7))
def test_g_eff_symmetry(d):
    g = lambda x: effective.g_eff(dataclasses.replace(CA, kc_x0=x), CA_MOTION)
    assert g(math.pi / 4 + d) == pytest.approx(g(math.pi / 4 - d), rel=1e-9, abs=1e-15)
    assert g(d + math.pi) == pytest.approx(g(d), rel=1e-9, abs=1e-15)
    assert g(-d) == pytest.approx(-g(d), rel=1e-9, abs=1e-15)


def test_anharmonicities():
    assert effective.two_level_anharmonicity(dataclasses.replace(CA, kc_x0=0.0)) == pytest.approx(
        2 * CA.g0**4 / CA.Delta**3
    )
    g = effective.g_eff(CA, CA_MOTION, dispersive=True)
    assert effective.motional_anharmonicity(CA, CA_MOTION, dispersive=True) == pytest.approx(2 * g * g / CA_MOTION.omega_m)


def test_mapping_fields():
    model = effective.effective_model(CA, CA_MOTION)
    om = model.om_params()
    assert om.omega_m == CA_MOTION.omega_m
    assert om.coupling == pytest.approx(-model.g_eff)
    assert om.kappa == pytest.approx(model.kappa_eff)
    assert om.delta_c == pytest.approx(effective.delta_c_dressed(CA))
    assert model.quality == pytest.approx(1 / 12)
    assert effective.map_to_effective_om(CA, CA_MOTION) == om


def _zpl_g2(model, p, motion):
    p = dataclasses.replace(p, delta_c=zpl_detuning(model, p, motion))
    return g2_zero(solve_weak_drive(build_model(model, p, motion)))


def _mapped_g2(p, motion, dissipative):
    p = dataclasses.replace(p, delta_c=zpl_detuning("jc-motion", p, motion))
    om = effective.map_to_effective_om(p, motion, dissipative=dissipative)
    zero = dataclasses.replace(om, delta_c=0.0)
    om = dataclasses.replace(om, delta_c=zpl_detuning("om", zero, m_max=motion.m_max))
    return g2_zero(solve_weak_drive(build_om(om, build_basis(2, motion.m_max, False))))


def test_g_diss_relative_to_g_eff():
    # ratio of dissipative to dispersive coupling is -(gamma/2)/delta0
    ratio = effective.g_diss(CA, CA_MOTION) / effective.g_eff(CA, CA_MOTION)
    assert ratio == pytest.approx(-0.5 * CA.gamma / CA.delta0)
    assert effective.g_diss(dataclasses.replace(CA, gamma=0.0), CA_MOTION) == 0.0
    assert effective.map_to_effective_om(CA, CA_MOTION).coupling.imag == 0


def test_effective_model_with_decay_coupling_reproduces_full_model_at_pi_over_3():
    motion = dataclasses.replace(CA_MOTION, m_max=24)
    full = _zpl_g2("jc-motion", CA, motion)
    assert abs(full - _mapped_g2(CA, motion, dissipative=True)) < 0.05
    # dropping the position dependence of kappa(x) loses most of the antibunching
    assert _mapped_g2(CA, motion, dissipative=False) - full > 0.1


def test_effective_model_tracks_idealised_full_model_where_motion_dominates():
    p = JcParams(g0=mhz(10), kappa=mhz(0.02), gamma=mhz(0.02), Delta=5 * mhz(10))
    motion = MotionParams(omega_m=mhz(0.5), omega_rec=khz(6.8), m_max=16)
    for x in np.linspace(0.7, 1.3, 7):
        q = dataclasses.replace(p, kc_x0=float(x))
        assert effective.two_level_anharmonicity(q) < 0.3 * effective.motional_anharmonicity(q, motion)
        assert abs(_zpl_g2("jc-motion", q, motion) - _zpl_g2("om-effective", q, motion)) < 0.1


def test_effective_model_misses_two_level_cancellation():
    # near kc_x0 = pi/8 the two nonlinearities cancel in the full model only
    p = JcParams(g0=mhz(10), kappa=mhz(0.02), gamma=mhz(0.02), Delta=5 * mhz(10), kc_x0=0.4)
    motion = MotionParams(omega_m=mhz(0.5), omega_rec=khz(6.8), m_max=16)
    assert _zpl_g2("jc-motion", p, motion) > 0.5 > _zpl_g2("om-effective", p, motion)


def test_full_model_approaches_effective_model_deep_in_dispersive_regime():
    # Rescale g0 with Delta so that g_eff^2/omega_m and kappa_eff stay fixed.
    base = JcParams(g0=mhz(1.4), kappa=mhz(0.05), gamma=mhz(0.05), Delta=8 * mhz(1.4), kc_x0=1.0)
    motion = MotionParams(omega_m=mhz(0.1), omega_rec=khz(6.8), m_max=16)
    gaps = []
    for ratio in (8, 12, 20):
        g0 = base.g0 * ratio / 8
        p = dataclasses.replace(base, g0=g0, Delta=ratio * g0)
        gaps.append(abs(_zpl_g2("jc-motion", p, motion) - _zpl_g2("om-effective", p, motion)))
    assert gaps[0] > gaps[1] > gaps[2]
