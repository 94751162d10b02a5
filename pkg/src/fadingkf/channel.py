"""Fading links, BER curve, packet success and the Markov-chain channel belief.

Complex link gains follow a first-order AR recursion and are simulated as
the ground truth.  The finite-state Markov chain (FSMC) built here is
strictly the controller's belief model over power gains, never the truth.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .errors import ConfigurationError, EstimationError

ROW_SUM_TOL = 1e-12


def db_to_power(db: float) -> float:
    return 10.0 ** (db / 10.0)


def power_to_db(p: float) -> float:
    return 10.0 * math.log10(p)


@dataclass(frozen=True)
class ArLinkModel:
    """First-order AR model of a complex link gain.

    `noise_var` is the variance of each real/imag component of the
    innovation, so the stationary mean power gain is 2*noise_var/(1-a^2).
    """

    a: float
    noise_var: float
    mean_power_dB: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.a < 1.0:
            raise ConfigurationError(f"AR coefficient must lie in [0, 1), got {self.a}")
        if self.noise_var <= 0:
            raise ConfigurationError("innovation variance must be > 0")

    @classmethod
    def from_mean_power(cls, a: float, mean_power_dB: float) -> "ArLinkModel":
        """Calibrate the innovation variance so E|g|^2 equals the given dB level."""
        if not 0.0 <= a < 1.0:
            raise ConfigurationError(f"AR coefficient must lie in [0, 1), got {a}")
        mean_power = db_to_power(mean_power_dB)
        return cls(a=a, noise_var=mean_power * (1.0 - a * a) / 2.0, mean_power_dB=mean_power_dB)

    @property
    def stationary_mean_power(self) -> float:
        return 2.0 * self.noise_var / (1.0 - self.a * self.a)


@dataclass
class LinkState:
    """Current complex gain of one link; `role` identifies the link."""

    g: complex
    role: str = ""

    @property
    def power_gain(self) -> float:
        return abs(self.g) ** 2


def stationary_link_state(model: ArLinkModel, rng: np.random.Generator, role: str = "") -> LinkState:
    """Draw the initial gain from the AR stationary distribution."""
    s = math.sqrt(model.noise_var / (1.0 - model.a * model.a))
    g = complex(rng.standard_normal() * s, rng.standard_normal() * s)
    return LinkState(g=g, role=role)


def ar_step(link: LinkState, model: ArLinkModel, rng: np.random.Generator) -> LinkState:
    """g' = a g + e with circular-symmetric complex Gaussian innovation."""
    s = math.sqrt(model.noise_var)
    e = complex(rng.standard_normal() * s, rng.standard_normal() * s)
    return LinkState(g=model.a * link.g + e, role=link.role)


@dataclass(frozen=True)
class BerModel:
    """Bit-error rate as a function of received power u*|g|^2.

    Kinds: ``constant`` (beta0), ``exponential`` (noise floor n0, the
    default: beta(x) = min(0.5, 0.5 exp(-x/(2 n0)))), ``q_function``
    (coherent BPSK over the same noise floor).
    """

    kind: str = "exponential"
    beta0: float = 0.01
    n0: float = 2.5e-16

    def __post_init__(self):
        if self.kind not in ("constant", "exponential", "q_function"):
            raise ConfigurationError(f"unknown BER model kind {self.kind!r}")
        if self.kind == "constant" and not 0.0 <= self.beta0 <= 1.0:
            raise ConfigurationError("constant BER must lie in [0, 1]")
        if self.kind != "constant" and self.n0 <= 0:
            raise ConfigurationError("noise floor must be > 0")


def ber(received_power: float, model: BerModel) -> float:
    """Per-bit error probability at the given received power."""
    if received_power < 0:
        raise ConfigurationError("received power must be >= 0")
    if model.kind == "constant":
        return model.beta0
    if model.kind == "exponential":
        return min(0.5, 0.5 * math.exp(-received_power / (2.0 * model.n0)))
    # coherent BPSK: Q(sqrt(2 x / n0)) = erfc(sqrt(x / n0)) / 2
    return 0.5 * erfc(math.sqrt(received_power / model.n0))


def packet_success(u: float, g2: float, bits: float, model: BerModel) -> float:
    """Probability a `bits`-long packet survives at transmit power u, gain g2.

    Zero power means no packet is sent at all, hence probability zero.
    """
    if bits <= 0:
        raise ConfigurationError("packet length must be > 0")
    if u <= 0.0:
        return 0.0
    return (1.0 - ber(u * g2, model)) ** bits


@dataclass(frozen=True)
class FsmcModel:
    """Equiprobable-partition Markov chain over power-gain states.

    Transitions are tridiagonal: the channel state only moves to a
    neighboring interval within one step.
    """

    thresholds: np.ndarray  # N+1 edges, thresholds[0] = 0, thresholds[-1] = inf
    state_gains: np.ndarray  # representative |g|^2 per state, strictly increasing
    P: np.ndarray  # N x N row-stochastic tridiagonal transition matrix

    def __post_init__(self):
        th = np.asarray(self.thresholds, dtype=float)
        sg = np.asarray(self.state_gains, dtype=float)
        P = np.asarray(self.P, dtype=float)
        object.__setattr__(self, "thresholds", th)
        object.__setattr__(self, "state_gains", sg)
        object.__setattr__(self, "P", P)
        N = sg.size
        if th.size != N + 1:
            raise ConfigurationError("need N+1 thresholds for N states")
        if not np.all(np.diff(sg) > 0):
            raise ConfigurationError("state gains must be strictly increasing")
        if P.shape != (N, N):
            raise ConfigurationError("transition matrix shape mismatch")
        if np.max(np.abs(P.sum(axis=1) - 1.0)) > ROW_SUM_TOL:
            raise ConfigurationError("transition rows must sum to one")
        for i in range(N):
            for j in range(N):
                if abs(i - j) > 1 and P[i, j] != 0.0:
                    raise ConfigurationError("transition matrix must be tridiagonal")

    @property
    def n_states(self) -> int:
        return self.state_gains.size

    def state_of(self, g2: float) -> int:
        """Interval index containing the power gain g2."""
        idx = int(np.searchsorted(self.thresholds[1:-1], g2, side="right"))
        return min(idx, self.n_states - 1)


def build_fsmc_from_trace(gain_trace, N: int) -> FsmcModel:
    """Estimate an FSMC from an observed |g|^2 trace.

    Thresholds partition the trace into equiprobable cells; state gains
    are the per-cell empirical means; transitions are counted and any
    off-tridiagonal mass is folded into the nearest neighbor cell.
    """
    trace = np.asarray(gain_trace, dtype=float).ravel()
    if N < 2:
        raise ConfigurationError("need at least 2 states")
    if trace.size < 100 * N:
        raise EstimationError(f"trace too short: {trace.size} < {100 * N}")

    qs = np.quantile(trace, np.linspace(0.0, 1.0, N + 1)[1:-1])
    edges = np.unique(qs)  # collapse duplicated quantiles (degenerate traces)
    thresholds = np.concatenate([[0.0], edges, [np.inf]])
    states = np.searchsorted(thresholds[1:-1], trace, side="right")
    # drop cells the trace never visits (ties at the quantile edges)
    visited = np.unique(states)
    if visited.size < thresholds.size - 1:
        inner = [thresholds[1 + visited[i]] for i in range(visited.size - 1)]
        thresholds = np.concatenate([[0.0], inner, [np.inf]])
        remap = {old: new for new, old in enumerate(visited)}
        states = np.vectorize(remap.get)(states)
    n_states = thresholds.size - 1

    state_gains = np.empty(n_states)
    for s in range(n_states):
        state_gains[s] = trace[states == s].mean()
    if n_states > 1 and not np.all(np.diff(state_gains) > 0):
        raise EstimationError("per-state mean gains are not increasing; trace too short")

    counts = np.zeros((n_states, n_states))
    np.add.at(counts, (states[:-1], states[1:]), 1.0)
    P = np.zeros_like(counts)
    for i in range(n_states):
        row = counts[i].copy()
        if row.sum() == 0:
            row[i] = 1.0  # unseen-from state: make it absorbing
        # fold any long jumps into the nearest tridiagonal cell
        for j in range(n_states):
            if j < i - 1:
                row[i - 1] += row[j]
                row[j] = 0.0
            elif j > i + 1:
                row[i + 1] += row[j]
                row[j] = 0.0
        P[i] = row / row.sum()
    return FsmcModel(thresholds=thresholds, state_gains=state_gains, P=P)


@dataclass(frozen=True)
class GainBelief:
    """Discrete belief over the next power gain: ((g2, prob), ...)."""

    support: tuple[tuple[float, float], ...]

    def __post_init__(self):
        total = sum(p for _, p in self.support)
        if abs(total - 1.0) > 1e-9:
            raise ConfigurationError(f"belief probabilities sum to {total}, expected 1")

    @classmethod
    def point(cls, g2: float) -> "GainBelief":
        return cls(support=((float(g2), 1.0),))


def predict_gain(link: LinkState, model: ArLinkModel, mode) -> GainBelief:
    """Controller-side belief over the next power gain of one link.

    `mode` is ``("known", g_next)``, ``"predicted"`` or ``("fixed", dB)``.
    Known yields the oracle next gain, predicted the AR conditional mean,
    fixed a configured constant power gain.
    """
    if isinstance(mode, tuple):
        tag, arg = mode
    else:
        tag, arg = mode, None
    if tag == "known":
        return GainBelief.point(abs(arg) ** 2)
    if tag == "predicted":
        return GainBelief.point(abs(model.a * link.g) ** 2)
    if tag == "fixed":
        return GainBelief.point(db_to_power(arg))
    raise ConfigurationError(f"unknown gain prediction mode {mode!r}")


def fsmc_belief(current_g2: float, model: FsmcModel) -> GainBelief:
    """Belief over the next power gain given the FSMC state of the current one."""
    row = model.P[model.state_of(current_g2)]
    support = tuple(
        (float(model.state_gains[j]), float(row[j])) for j in range(model.n_states) if row[j] > 0.0
    )
    return GainBelief(support=support)
