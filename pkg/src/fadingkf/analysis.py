"""Exponential covariance bound machinery and experiment metrics.

The bound says the expected spectral norm of the one-step-ahead error
covariance decays at rate `decay_rate` toward a floor set by the
pseudo-inverse gain of the observable flag patterns and the worst-case
per-sensor quantization noise at the minimum admissible rates.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .codec import HR_COEFF
from .errors import ConfigurationError
from .plant import PlantModel


@dataclass
class BoundParams:
    """Constants of the exponential covariance bound."""

    c: float
    varpi: float
    a_norm2: float
    decay_rate: float | None = None

    def __post_init__(self):
        if self.c <= 0 or self.varpi < 0:
            raise ConfigurationError("bound constants out of range")
        if self.decay_rate is not None and not 0.0 <= self.decay_rate < 1.0:
            raise ConfigurationError("decay rate must lie in [0, 1)")


def spectral_norm(M: np.ndarray) -> float:
    return float(np.linalg.norm(M, 2))


def full_rank_patterns(model: PlantModel) -> list[tuple[int, ...]]:
    """Flag patterns whose stacked observation matrix has full column rank."""
    n, M = model.n, model.n_sensors
    out = []
    for theta in itertools.product((0, 1), repeat=M):
        C = np.vstack([theta[m] * model.sensors[m].C for m in range(M)])
        if np.linalg.matrix_rank(C) == n:
            out.append(theta)
    return out


def bound_constants(model: PlantModel, source_var, min_rates=None) -> BoundParams:
    """Compute the bound's pseudo-inverse gain and noise-floor constants.

    `source_var` holds the per-sensor measurement variances used for the
    worst-case quantizer distortion; `min_rates` defaults to each
    sensor's smallest admissible bit-rate.
    """
    patterns = full_rank_patterns(model)
    if not patterns:
        raise ConfigurationError("unobservable under all flag patterns")
    c = 0.0
    for theta in patterns:
        C = np.vstack([theta[m] * model.sensors[m].C for m in range(model.n_sensors)])
        pinv = np.linalg.solve(C.T @ C, C.T)
        c = max(c, spectral_norm(pinv.T @ pinv))
    a_norm2 = spectral_norm(model.A) ** 2
    if min_rates is None:
        min_rates = [min(s.rate_set) for s in model.sensors]
    sv = np.asarray(source_var, dtype=float)
    quant = sum(HR_COEFF * sv[m] * 2.0 ** (-2.0 * min_rates[m]) for m in range(model.n_sensors))
    noise = sum(s.R for s in model.sensors)
    return BoundParams(c=c, varpi=a_norm2 * (quant + noise), a_norm2=a_norm2)


def bound_curve(params: BoundParams, P0: np.ndarray, Q: np.ndarray, k_max: int) -> np.ndarray:
    """Bound values for k = 0..k_max."""
    if params.decay_rate is None:
        raise ConfigurationError("decay rate not set")
    rho = params.decay_rate
    tr_P0 = float(np.trace(P0))
    floor = params.varpi * params.c + float(np.trace(Q))
    k = np.arange(k_max + 1)
    rho_k = rho**k
    if rho == 0.0:
        geo = np.where(k == 0, 0.0, 1.0)
    else:
        geo = (1.0 - rho_k) / (1.0 - rho)
    return rho_k * tr_P0 + floor * geo


def estimate_nu(per_state_success, full_rank_mask, samples: int, rng: np.random.Generator):
    """Monte-Carlo estimate of the flag-pattern outage probability per state.

    `per_state_success` is a sequence of per-sensor packet-success
    vectors, one per visited (P, g) state; `full_rank_mask` maps a flag
    tuple to observability.  Returns (max, per-state estimates).
    """
    if samples < 1000:
        raise ConfigurationError("need at least 1000 samples per state")
    ests = []
    for lam in per_state_success:
        lam = np.asarray(lam, dtype=float)
        draws = rng.random((samples, lam.size)) < lam[None, :]
        bad = sum(
            1 for row in draws if not full_rank_mask[tuple(int(b) for b in row)]
        )
        ests.append(bad / samples)
    ests = np.asarray(ests)
    return float(ests.max()), ests


def rank_mask(model: PlantModel) -> dict:
    """Map every flag tuple to whether the stacked matrix is full rank."""
    ok = set(full_rank_patterns(model))
    return {
        theta: theta in ok
        for theta in itertools.product((0, 1), repeat=model.n_sensors)
    }


@dataclass
class RunMetrics:
    """Time-averaged quantities of one closed-loop run."""

    V_bar: float
    phi: float
    D_emp: float
    E_total: float
    relay_efficiency: float | None = None
    horizon: int = 0

    def as_dict(self) -> dict:
        d = {
            "V_bar": self.V_bar,
            "phi": self.phi,
            "D_emp": self.D_emp,
            "E_total": self.E_total,
            "horizon": self.horizon,
        }
        if self.relay_efficiency is not None:
            d["relay_efficiency"] = self.relay_efficiency
        return d


def compute_metrics(trace) -> RunMetrics:
    """Fold a sequence of TraceRecord-like rows into run metrics.

    Sums are accumulated in record order so streaming and batch
    evaluation agree bit for bit.
    """
    records = list(trace)
    if not records:
        raise ConfigurationError("empty trace")
    n = len(records)
    v = phi = d = e = 0.0
    relay_on = relay_ok = 0
    for r in records:
        v += r.cost_total
        phi += r.tr_post
        d += r.sq_error
        e += r.energy
        if any(mu > 0 for mu in r.relay_power):
            relay_on += 1
            if any(bit > 0 for bit in r.relay_received):
                relay_ok += 1
    eff = (relay_ok / relay_on) if relay_on else None
    return RunMetrics(V_bar=v / n, phi=phi / n, D_emp=d / n, E_total=e,
                      relay_efficiency=eff, horizon=n)
