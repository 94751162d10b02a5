import itertools

import numpy as np
import pytest

from fadingkf.channel import BerModel
from fadingkf.codec import SchemeSpec
from fadingkf.controller import DecisionSet, SensorDecision
from fadingkf.errors import ConfigurationError
from fadingkf.link import (
    EnergyParams,
    TransmissionOutcome,
    draw_outcomes,
    reconstruct_flags,
    relay_payload_bits,
    step_energy,
)

# the reference reconstruction truth table: (g1, g2, z1, z2, gt) -> (t1, t2)
RELAY_TABLE = {
    (1, 1, 1, 1, 1): (1, 1),
    (1, 1, 1, 0, 0): (1, 1),
    (1, 1, 0, 1, 0): (1, 1),
    (1, 1, 0, 0, 0): (1, 1),
    (1, 0, 1, 1, 1): (1, 1),
    (0, 1, 1, 1, 1): (1, 1),
    (1, 0, 1, 0, 0): (1, 0),
    (1, 0, 0, 1, 0): (1, 0),
    (1, 0, 0, 0, 0): (1, 0),
    (0, 1, 1, 0, 0): (0, 1),
    (0, 1, 0, 1, 0): (0, 1),
    (0, 1, 0, 0, 0): (0, 1),
    (0, 0, 1, 1, 1): (0, 0),
    (0, 0, 1, 0, 0): (0, 0),
    (0, 0, 0, 1, 0): (0, 0),
    (0, 0, 0, 0, 0): (0, 0),
}

SDC8 = SchemeSpec(kind="sdc", total_rate=8.0)


def _outcome(g1, g2, z1, z2, gt):
    return TransmissionOutcome(
        gamma=((g1,), (g2,)),
        zeta=((z1,), (z2,)),
        gamma_tilde=(gt,),
        relay_transmitted=(int(z1 and z2),),
    )


def test_relay_truth_table_reproduced():
    schemes = [SDC8, SDC8]
    seen = set()
    for bits in itertools.product((0, 1), repeat=5):
        g1, g2, z1, z2, gt = bits
        if gt > z1 * z2:
            continue  # relay never transmits without both payloads
        flags = reconstruct_flags(_outcome(*bits), schemes, relay_enabled=True)
        if gt == z1 * z2:
            assert bits in RELAY_TABLE, f"combination {bits} missing from the table"
            assert flags.theta == RELAY_TABLE[bits], f"theta mismatch at {bits}"
            seen.add(bits)
        else:
            # transmitted but lost: falls back to the direct receptions
            assert flags.theta == (g1, g2)
    assert seen == set(RELAY_TABLE)


def test_relay_alone_recovers_nothing():
    flags = reconstruct_flags(_outcome(0, 0, 1, 1, 1), [SDC8, SDC8], relay_enabled=True)
    assert flags.theta == (0, 0)


def test_theta_monotone_in_outcome_bits():
    schemes = [SDC8, SDC8]
    for bits in itertools.product((0, 1), repeat=5):
        g1, g2, z1, z2, gt = bits
        if gt > z1 * z2:
            continue
        theta = reconstruct_flags(_outcome(*bits), schemes, relay_enabled=True).theta
        for i in range(5):
            if not bits[i]:
                continue
            lowered = list(bits)
            lowered[i] = 0
            if lowered[4] > lowered[2] * lowered[3]:
                lowered[4] = 0
            low = reconstruct_flags(_outcome(*lowered), schemes, relay_enabled=True).theta
            assert all(a <= b for a, b in zip(low, theta))


def test_zec_flags_all_combinations():
    dominant = SchemeSpec(kind="sdc", total_rate=8.0)
    dependent = SchemeSpec(kind="zec", total_rate=8.0, dominant=0, tx_rate=6.0)
    for g_dom in (0, 1):
        for g_dep in (0, 1):
            outcome = TransmissionOutcome(gamma=((g_dom,), (g_dep,)), zeta=((), ()),
                                          gamma_tilde=())
            flags = reconstruct_flags(outcome, [dominant, dependent], relay_enabled=False)
            assert flags.theta[0] == g_dom
            assert flags.theta[1] == g_dep * g_dom


def test_mdc_flags_and_counts():
    mdc = SchemeSpec(kind="mdc", total_rate=9.0, descriptions=3, shared_bits=1.0)
    outcome = TransmissionOutcome(gamma=((0, 1, 1),), zeta=((),), gamma_tilde=())
    flags = reconstruct_flags(outcome, [mdc], relay_enabled=False)
    assert flags.theta == (1,)
    assert flags.received_count == (2,)
    nothing = TransmissionOutcome(gamma=((0, 0, 0),), zeta=((),), gamma_tilde=())
    flags = reconstruct_flags(nothing, [mdc], relay_enabled=False)
    assert flags.theta == (0,)


def _decision(u1, u2, mu=()):
    return DecisionSet(
        sensors=(SensorDecision(du=0.0, u=u1, scheme=SDC8),
                 SensorDecision(du=0.0, u=u2, scheme=SDC8)),
        relays=mu,
    )


def _uniforms(value=0.0, M=2, L=1):
    return {"s": [[value] * 3 for _ in range(M)],
            "sr": [[value] * L for _ in range(M)],
            "r": [value] * L}


GAINS = {("s", 0): 1e-10, ("s", 1): 1e-10, ("sr", 0, 0): 1e-10, ("sr", 1, 0): 1e-10,
         ("r", 0): 1e-10}


def test_draw_outcomes_zero_power():
    out = draw_outcomes(_decision(0.0, 0.0, (0.0,)), GAINS, BerModel(), _uniforms())
    assert out.gamma == ((0,), (0,))
    assert out.zeta == ((0,), (0,))
    assert out.gamma_tilde == (0,)


def test_draw_outcomes_perfect_channel():
    ber = BerModel(kind="constant", beta0=0.0)
    out = draw_outcomes(_decision(1e-4, 1e-4, (6e-5,)), GAINS, ber, _uniforms())
    assert out.gamma == ((1,), (1,))
    assert out.zeta == ((1,), (1,))
    assert out.gamma_tilde == (1,)
    assert out.relay_transmitted == (1,)


def test_relay_needs_both_payloads():
    ber = BerModel(kind="constant", beta0=0.0)
    uni = _uniforms()
    uni["sr"][1][0] = 1.0  # sensor 2 -> relay packet lost even at beta = 0
    out = draw_outcomes(_decision(1e-4, 1e-4, (6e-5,)), GAINS, ber, uni)
    assert out.zeta == ((1,), (0,))
    assert out.gamma_tilde == (0,)
    assert out.relay_transmitted == (0,)


def test_relay_payload_bits():
    assert relay_payload_bits([3.0, 5.0]) == 5.0
    assert relay_payload_bits([4.0]) == 4.0
    assert relay_payload_bits([6.0, 6.0]) == 6.0
    with pytest.raises(ConfigurationError):
        relay_payload_bits([])


def test_step_energy_zero_when_silent():
    params = EnergyParams(bit_rate=1e8, processing=0.0, u_max=(3e-4, 3e-4), mu_max=(6e-5,))
    assert step_energy(_decision(0.0, 0.0, (0.0,)), {}, params) == 0.0


def test_step_energy_closed_form():
    params = EnergyParams(bit_rate=1e8, processing=0.0, u_max=(3e-4,), mu_max=())
    d = DecisionSet(sensors=(SensorDecision(du=0.0, u=3e-4, scheme=SDC8),), relays=())
    assert step_energy(d, {}, params) == pytest.approx(2.4e-11, rel=1e-12)


def test_step_energy_processing_cost_additive():
    params = EnergyParams(bit_rate=1e8, processing=1e-12, u_max=(3e-4, 3e-4), mu_max=(6e-5,))
    base = EnergyParams(bit_rate=1e8, processing=0.0, u_max=(3e-4, 3e-4), mu_max=(6e-5,))
    d = _decision(1e-4, 2e-4, (6e-5,))
    with_relay = {0: 8.0}
    diff = step_energy(d, with_relay, params) - step_energy(d, with_relay, base)
    assert diff == pytest.approx(3e-12, rel=1e-9)  # three active transmitters


def test_step_energy_relay_only_when_transmitting():
    params = EnergyParams(bit_rate=1e8, processing=0.0, u_max=(3e-4, 3e-4), mu_max=(6e-5,))
    d = _decision(1e-4, 1e-4, (6e-5,))
    silent = step_energy(d, {}, params)
    active = step_energy(d, {0: 8.0}, params)
    assert active - silent == pytest.approx(8.0 * 6e-5 / 1e8, rel=1e-12)


def test_step_energy_rejects_cap_violation():
    params = EnergyParams(bit_rate=1e8, processing=0.0, u_max=(1e-4, 1e-4), mu_max=())
    with pytest.raises(ConfigurationError):
        step_energy(_decision(2e-4, 0.0), {}, params)
