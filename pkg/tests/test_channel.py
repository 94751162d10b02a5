import math

import numpy as np
import pytest
from scipy.signal import lfilter

from fadingkf.channel import (
    ArLinkModel,
    BerModel,
    FsmcModel,
    GainBelief,
    LinkState,
    ar_step,
    ber,
    build_fsmc_from_trace,
    db_to_power,
    fsmc_belief,
    packet_success,
    predict_gain,
)
from fadingkf.errors import ConfigurationError, EstimationError


class _FixedNormals:
    def __init__(self, values):
        self.values = list(values)

    def standard_normal(self, size=None):
        assert size is None
        return self.values.pop(0)


def test_ar_step_memoryless():
    model = ArLinkModel(a=0.0, noise_var=1.0)
    out = ar_step(LinkState(g=5 + 5j), model, _FixedNormals([1.0, 0.0]))
    assert out.g == pytest.approx(1 + 0j)


def test_ar_coefficient_bounds():
    with pytest.raises(ConfigurationError):
        ArLinkModel(a=1.0, noise_var=1.0)
    with pytest.raises(ConfigurationError):
        ArLinkModel(a=-0.1, noise_var=1.0)
    ArLinkModel(a=1.0 - 1e-9, noise_var=1.0)  # strictly below one is admissible


def test_ar_stationary_power():
    # E|g|^2 = 2 nv / (1 - a^2), checked over 1e6 steps
    a, nv = 0.999, 0.5
    model = ArLinkModel(a=a, noise_var=nv)
    rng = np.random.default_rng(8)
    K = 1_000_000
    e = rng.standard_normal(K) * math.sqrt(nv) + 1j * rng.standard_normal(K) * math.sqrt(nv)
    g = lfilter([1.0], [1.0, -a], e)
    emp = float(np.mean(np.abs(g[5000:]) ** 2))
    assert emp == pytest.approx(2 * nv / (1 - a * a), rel=0.02)
    assert model.stationary_mean_power == pytest.approx(2 * nv / (1 - a * a))


def test_from_mean_power_calibration():
    model = ArLinkModel.from_mean_power(a=0.99, mean_power_dB=-105.0)
    assert model.stationary_mean_power == pytest.approx(db_to_power(-105.0))


def test_ber_constant():
    assert ber(123.0, BerModel(kind="constant", beta0=0.5)) == 0.5


def test_ber_exponential_closed_form():
    model = BerModel(kind="exponential", n0=2.5e-16)
    assert ber(2e-15, model) == pytest.approx(0.5 * math.exp(-4.0), rel=1e-12)
    assert ber(2e-15, model) == pytest.approx(9.16e-3, rel=1e-2)


def test_ber_zero_power_uninformative():
    for kind in ("exponential", "q_function"):
        assert ber(0.0, BerModel(kind=kind, n0=2.5e-16)) == pytest.approx(0.5)


def test_ber_rejects_negative():
    with pytest.raises(ConfigurationError):
        ber(-1.0, BerModel())


def test_packet_success_examples():
    assert packet_success(1.0, 1.0, 2.0, BerModel(kind="constant", beta0=0.5)) == pytest.approx(0.25)
    assert packet_success(0.0, 1.0, 8.0, BerModel()) == 0.0
    model = BerModel(kind="exponential", n0=2.5e-16)
    expect = (1 - 0.5 * math.exp(-4.0)) ** 8
    assert packet_success(1.0, 2e-15, 8.0, model) == pytest.approx(expect, rel=1e-12)
    assert packet_success(1.0, 2e-15, 8.0, model) == pytest.approx(0.929, abs=5e-3)


def test_packet_success_monotonicity():
    rng = np.random.default_rng(5)
    models = [BerModel(kind="exponential", n0=2.5e-16),
              BerModel(kind="q_function", n0=2.5e-16),
              BerModel(kind="constant", beta0=0.3)]
    for model in models:
        for _ in range(200):
            g2 = 10.0 ** rng.uniform(-13, -9)
            u1, u2 = sorted(rng.uniform(1e-6, 5e-4, size=2))
            b1, b2 = sorted(rng.uniform(1, 12, size=2))
            # non-decreasing in power, non-increasing in bits
            assert packet_success(u1, g2, b1, model) <= packet_success(u2, g2, b1, model) + 1e-15
            assert packet_success(u1, g2, b2, model) <= packet_success(u1, g2, b1, model) + 1e-15


def _ar_power_trace(K, seed=0, a=0.995, mean_db=-105.0):
    model = ArLinkModel.from_mean_power(a=a, mean_power_dB=mean_db)
    rng = np.random.default_rng(seed)
    s = math.sqrt(model.noise_var)
    e = rng.standard_normal(K) * s + 1j * rng.standard_normal(K) * s
    g = lfilter([1.0], [1.0, -a], e)
    return np.abs(g) ** 2


def test_fsmc_construction_properties():
    trace = _ar_power_trace(5000)
    model = build_fsmc_from_trace(trace, 12)
    assert model.n_states == 12
    assert np.max(np.abs(model.P.sum(axis=1) - 1.0)) <= 1e-12
    for i in range(12):
        for j in range(12):
            if abs(i - j) > 1:
                assert model.P[i, j] == 0.0
    assert np.all(np.diff(model.state_gains) > 0)


def test_fsmc_constant_trace_degenerates():
    model = build_fsmc_from_trace(np.full(2000, 3.14), 5)
    assert model.n_states == 1
    assert np.allclose(model.P, [[1.0]])


def test_fsmc_rejects_short_trace():
    with pytest.raises(EstimationError):
        build_fsmc_from_trace(np.ones(50), 2)


def _reference_fsmc():
    # a 12-state office-band channel belief model; reference rows
    gains_db = [-117.77, -112.88, -110.50, -108.83, -107.49, -106.33,
                -105.30, -104.31, -103.32, -102.29, -101.08, -99.41]
    rows = [
        (0.0000, 0.9990, 0.0010),
        (0.0010, 0.9978, 0.0013),  # row sums slightly off 1 in the reference table
        (0.0013, 0.9973, 0.0014),
        (0.0014, 0.9971, 0.0015),
        (0.0015, 0.9970, 0.0015),
        (0.0015, 0.9970, 0.0015),
        (0.0015, 0.9971, 0.0014),
        (0.0014, 0.9973, 0.0013),
        (0.0013, 0.9976, 0.0011),
        (0.0011, 0.9981, 0.0008),
        (0.0008, 0.9986, 0.0005),
        (0.0005, 0.9995, 0.0000),
    ]
    P = np.zeros((12, 12))
    for i, (down, stay, up) in enumerate(rows):
        if i > 0:
            P[i, i - 1] = down
        P[i, i] = stay
        if i < 11:
            P[i, i + 1] = up
        P[i] /= P[i].sum()
    gains = np.array([db_to_power(g) for g in gains_db])
    mid = np.sqrt(gains[:-1] * gains[1:])  # geometric interval edges
    thresholds = np.concatenate([[0.0], mid, [np.inf]])
    return FsmcModel(thresholds=thresholds, state_gains=gains, P=P)


def test_fsmc_belief_reference_rows():
    model = _reference_fsmc()
    low = fsmc_belief(db_to_power(-117.77), model)
    support = dict(low.support)
    assert support[db_to_power(-117.77)] == pytest.approx(0.9990, abs=1e-4)
    assert support[db_to_power(-112.88)] == pytest.approx(0.0010, abs=1e-4)
    top = fsmc_belief(db_to_power(-99.41), model)
    support = dict(top.support)
    assert support[db_to_power(-99.41)] == pytest.approx(0.9995, abs=1e-4)
    assert support[db_to_power(-101.08)] == pytest.approx(0.0005, abs=1e-4)


def test_fsmc_belief_uniform_two_state():
    model = FsmcModel(thresholds=[0.0, 1.0, np.inf], state_gains=[0.5, 2.0],
                      P=[[0.5, 0.5], [0.5, 0.5]])
    belief = fsmc_belief(0.1, model)
    assert dict(belief.support) == {0.5: 0.5, 2.0: 0.5}


def test_predict_gain_modes():
    model = ArLinkModel(a=0.999, noise_var=1.0)
    link = LinkState(g=1 + 0j)
    predicted = predict_gain(link, model, "predicted")
    assert predicted.support[0][0] == pytest.approx(0.999**2)
    fixed = predict_gain(link, model, ("fixed", -110.0))
    assert fixed.support[0][0] == pytest.approx(1e-11)
    known = predict_gain(link, model, ("known", 2 + 1j))
    assert known.support[0][0] == pytest.approx(5.0)


def test_gain_belief_validates():
    with pytest.raises(ConfigurationError):
        GainBelief(support=((1.0, 0.5), (2.0, 0.4)))
