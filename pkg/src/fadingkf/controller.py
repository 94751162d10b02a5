"""Gateway-side one-step predictive decision maker.

Evaluates the expected posterior trace plus weighted energy of every
admissible decision (power increments, bit-rates, coding schemes, relay
on/off) and returns the minimizer.  The two-stage search first picks
SDC-vs-MDC per sensor by expected measurement distortion, then tests
zero-error-coding pairings among the SDC sensors; a full exhaustive mode
serves as the oracle.  The simple logic-based controller that only
inverts the channel is included as the baseline.
"""

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import BerModel, GainBelief, packet_success, power_to_db
from .codec import SchemeSpec, _binom_pmf, expected_scheme_distortion, sdc_distortion, zec_rates
from .errors import ConfigurationError, SearchSpaceError
from .link import EnergyParams
from .plant import PlantModel

DEFAULT_OUTCOME_CAP = 2**16


@dataclass(frozen=True)
class SensorDecision:
    """Power increment, resulting power, and coding scheme for one sensor."""

    du: float
    u: float
    scheme: SchemeSpec


@dataclass(frozen=True)
class DecisionSet:
    """Joint decision for the next slot: per-sensor choices, per-relay power."""

    sensors: tuple[SensorDecision, ...]
    relays: tuple[float, ...] = ()


@dataclass(frozen=True)
class CostBreakdown:
    """Expected posterior trace, energy and their weighted total."""

    expected_trace: float
    energy: float
    total: float


@dataclass(frozen=True)
class ControllerConfig:
    """Tuning of the predictive controller and its search."""

    energy_weight: float = 0.0
    increment_set: tuple[float, ...] = (3e-5, -3e-5)
    search: str = "two_stage"  # or "exhaustive"
    scheme_menu: tuple[str, ...] = ("sdc",)
    mdc_descriptions: tuple[int, ...] = (2, 3)
    mdc_shared_bits: tuple = (0.0, 1.0, 2.0, "max")  # "max" means full redundancy b/J
    outcome_cap: int = DEFAULT_OUTCOME_CAP
    simple_threshold: float = 2e-15
    simple_delta: float | None = None

    def __post_init__(self):
        if self.energy_weight < 0:
            raise ConfigurationError("energy weight must be >= 0")
        if not self.increment_set:
            raise ConfigurationError("increment set must be non-empty")
        if self.search not in ("two_stage", "exhaustive"):
            raise ConfigurationError(f"unknown search mode {self.search!r}")
        menu = tuple(self.scheme_menu)
        if not menu or any(k not in ("sdc", "zec", "mdc") for k in menu):
            raise ConfigurationError(f"invalid scheme menu {menu}")
        if "sdc" not in menu:
            raise ConfigurationError("scheme menu must include sdc")
        object.__setattr__(self, "scheme_menu", menu)

    def shared_bits_grid(self, b: float, J: int) -> tuple[float, ...]:
        per_desc = b / J
        vals = []
        for a in self.mdc_shared_bits:
            x = per_desc if a == "max" else float(a)
            if 0.0 <= x <= per_desc and x not in vals:
                vals.append(x)
        return tuple(sorted(vals))


@dataclass
class DecisionContext:
    """Everything the controller sees at one step.

    `beliefs` maps link keys ("s", m), ("sr", m, l), ("r", l) to gain
    beliefs built by the harness from the configured prediction modes.
    `meas_cov` is the stationary measurement covariance used for the
    zero-error-coding rate savings.
    """

    model: PlantModel
    source_var: np.ndarray
    P_next_prior: np.ndarray
    u_prev: tuple[float, ...]
    beliefs: dict
    ber: BerModel
    energy: EnergyParams
    meas_cov: np.ndarray | None = None
    mu_max: tuple[float, ...] = ()
    _zec_savings: dict = field(default_factory=dict)

    @property
    def n_relays(self) -> int:
        return len(self.mu_max)

    def zec_tx_rate(self, m: int, dominant: int, b: float) -> float:
        """Transmitted rate of dependent sensor m coded against `dominant`."""
        key = (m, dominant)
        if key not in self._zec_savings:
            if self.meas_cov is None:
                raise ConfigurationError("ZEC requires the stationary measurement covariance")
            idx = [dominant, m]
            sub = self.meas_cov[np.ix_(idx, idx)]
            _, dep_rate = zec_rates(sub, (b, b), dominant=0)
            self._zec_savings[key] = b - dep_rate
        return max(b - self._zec_savings[key], 0.5)


def apply_increment(u_prev: float, du: float, u_max: float) -> float:
    """Next power level: previous plus increment, clamped to [0, cap]."""
    return min(max(u_prev + du, 0.0), u_max)


class _StepCache:
    """Per-step memo: marginal success probabilities and posterior traces.

    The posterior trace for a flag pattern uses tr P - tr(S^-1 G) with
    S = C_a P C_a^T + diag(R) and G = (C_a P)(C_a P)^T, precomputed once
    per pattern; 1x1 and 2x2 solves are inlined.
    """

    def __init__(self, ctx: DecisionContext):
        self.ctx = ctx
        self.lam = {}
        self.pmf = {}
        self.trace = {}
        self._theta_data = {}
        self._tr_prior = float(np.trace(ctx.P_next_prior))

    def success(self, link, u: float, bits: float) -> float:
        key = (link, u, bits)
        out = self.lam.get(key)
        if out is None:
            belief = self.ctx.beliefs[link]
            out = sum(p * packet_success(u, g2, bits, self.ctx.ber) for g2, p in belief.support)
            self.lam[key] = out
        return out

    def count_pmf(self, link, u: float, scheme: SchemeSpec) -> list[float]:
        key = (link, u, scheme.total_rate, scheme.descriptions)
        out = self.pmf.get(key)
        if out is None:
            belief = self.ctx.beliefs[link]
            J = scheme.descriptions
            bits = scheme.packet_bits()
            out = [0.0] * (J + 1)
            for g2, p in belief.support:
                lam = packet_success(u, g2, bits, self.ctx.ber)
                for j, q in enumerate(_binom_pmf(J, lam)):
                    out[j] += p * q
            self.pmf[key] = out
        return out

    def _pattern(self, theta: tuple):
        data = self._theta_data.get(theta)
        if data is None:
            model = self.ctx.model
            rows = [m for m in range(model.n_sensors) if theta[m]]
            Ca = np.vstack([model.sensors[m].C for m in rows])
            T = Ca @ self.ctx.P_next_prior
            alpha = T @ Ca.T
            G = T @ T.T
            data = (alpha, G)
            self._theta_data[theta] = data
        return data

    def posterior_trace(self, theta: tuple, r_active: tuple) -> float:
        key = (theta, r_active)
        out = self.trace.get(key)
        if out is not None:
            return out
        if not r_active:
            out = self._tr_prior
        else:
            alpha, G = self._pattern(theta)
            a = len(r_active)
            if a == 1:
                out = self._tr_prior - G[0, 0] / (alpha[0, 0] + r_active[0])
            elif a == 2:
                s00 = alpha[0, 0] + r_active[0]
                s11 = alpha[1, 1] + r_active[1]
                s01 = alpha[0, 1]
                det = s00 * s11 - s01 * s01
                out = self._tr_prior - (
                    s11 * G[0, 0] - s01 * (G[0, 1] + G[1, 0]) + s00 * G[1, 1]
                ) / det
            else:
                S = alpha + np.diag(r_active)
                out = self._tr_prior - np.trace(np.linalg.solve(S, G))
        out = float(out)
        self.trace[key] = out
        return out


def expected_posterior_trace(P_next_prior, S: DecisionSet, ctx: DecisionContext,
                             cache: _StepCache | None = None,
                             outcome_cap: int = DEFAULT_OUTCOME_CAP) -> float:
    """Expectation of trace P(k+1|k+1) over the joint transmission-outcome lattice.

    Enumerates, per sensor, a success bit (SDC/ZEC) or a received-count
    (MDC, binomial weights mixed over the gain belief) and, per active
    relay, the overhear/forward lattice with the relay-transmit rule;
    each outcome's flags and equivalent noise feed the covariance update.
    """
    if P_next_prior is not ctx.P_next_prior:
        ctx = replace_prior(ctx, P_next_prior)
        cache = None
    if cache is None:
        cache = _StepCache(ctx)
    M = len(S.sensors)
    active_relays = [l for l, mu in enumerate(S.relays) if mu > 0.0]

    domains = []
    r_table = []  # per sensor: R_m + D_m indexed by received count
    for m, sd in enumerate(S.sensors):
        sc = sd.scheme
        R_m = ctx.model.sensors[m].R
        svar_m = float(ctx.source_var[m])
        if sc.kind == "mdc":
            pmf = cache.count_pmf(("s", m), sd.u, sc)
            domains.append([(j, float(pmf[j])) for j in range(sc.descriptions + 1)])
            prof = sc.profile(svar_m)
            r_table.append([R_m + d for d in prof.D])
        else:
            lam = cache.success(("s", m), sd.u, sc.packet_bits()) if sd.u > 0 else 0.0
            domains.append([(0, 1.0 - lam), (1, lam)])
            r_sdc = R_m + sdc_distortion(svar_m, sc.total_rate)
            r_table.append([r_sdc, r_sdc])

    n_out = math.prod(len(d) for d in domains)
    n_out *= (2 ** (M * len(active_relays))) * (2 ** len(active_relays))
    if n_out > outcome_cap:
        raise SearchSpaceError(f"search space too large: {n_out} outcomes > cap {outcome_cap}")

    if active_relays and any(sd.scheme.kind != "sdc" for sd in S.sensors):
        raise ConfigurationError("relaying requires single-description coding")

    relay_lam = {}
    ml_pairs = []
    zeta_domains = []
    if active_relays:
        payload = max(sd.scheme.packet_bits() for sd in S.sensors)
        for l in active_relays:
            relay_lam[l] = cache.success(("r", l), S.relays[l], payload)
        for m in range(M):
            for l in active_relays:
                p = (cache.success(("sr", m, l), S.sensors[m].u,
                                   S.sensors[m].scheme.packet_bits())
                     if S.sensors[m].u > 0 else 0.0)
                ml_pairs.append((m, l))
                zeta_domains.append([(0, 1.0 - p), (1, p)])

    zec_pairs = [(m, sd.scheme.dominant) for m, sd in enumerate(S.sensors)
                 if sd.scheme.kind == "zec"]
    total = 0.0
    for combo in itertools.product(*domains):
        p_s = 1.0
        counts = []
        for val, p in combo:
            p_s *= p
            counts.append(val)
        if p_s == 0.0:
            continue
        direct = [int(c >= 1) for c in counts]
        theta = list(direct)
        for m, dom in zec_pairs:
            theta[m] = direct[m] * direct[dom]

        if not active_relays:
            th = tuple(theta)
            r_active = tuple(r_table[m][counts[m]] for m in range(M) if th[m])
            total += p_s * cache.posterior_trace(th, r_active)
            continue

        # relay lattice: overhear bits zeta, then the forward bit per relay
        for zcombo in itertools.product(*zeta_domains):
            p_z = p_s
            zbits = {}
            for m_l, (bit, p) in zip(ml_pairs, zcombo):
                p_z *= p
                zbits[m_l] = bit
            if p_z == 0.0:
                continue
            fwd_domains = []
            for l in active_relays:
                if all(zbits[(m, l)] for m in range(M)):
                    lam = relay_lam[l]
                    fwd_domains.append([(0, 1.0 - lam), (1, lam)])
                else:
                    fwd_domains.append([(0, 1.0)])
            for fcombo in itertools.product(*fwd_domains):
                p = p_z
                got_relay = False
                for bit, pf in fcombo:
                    p *= pf
                    got_relay = got_relay or bit == 1
                if p == 0.0:
                    continue
                th = list(direct)
                if got_relay:
                    for m in range(M):
                        if not th[m] and all(direct[j] for j in range(M) if j != m):
                            th[m] = 1
                th = tuple(th)
                r_active = tuple(r_table[m][1] for m in range(M) if th[m])
                total += p * cache.posterior_trace(th, r_active)
    return total


def replace_prior(ctx: DecisionContext, P_next_prior) -> DecisionContext:
    """Context with a different one-step-ahead prior covariance."""
    return DecisionContext(
        model=ctx.model, source_var=ctx.source_var, P_next_prior=np.asarray(P_next_prior, float),
        u_prev=ctx.u_prev, beliefs=ctx.beliefs, ber=ctx.ber, energy=ctx.energy,
        meas_cov=ctx.meas_cov, mu_max=ctx.mu_max, _zec_savings=ctx._zec_savings,
    )


def decision_energy(S: DecisionSet, ctx: DecisionContext) -> float:
    """Energy term of the cost: sensor transmissions plus worst-case relay payloads.

    The realized relay payload is unknown at decision time, so an active
    relay is billed for the longest packet any sensor may send.
    """
    total = 0.0
    for sd in S.sensors:
        if sd.u > 0.0:
            total += ctx.energy.transmit_energy(sd.scheme.transmitted_bits(), sd.u)
    if any(mu > 0.0 for mu in S.relays):
        payload = max(sd.scheme.packet_bits() for sd in S.sensors)
        for mu in S.relays:
            if mu > 0.0:
                total += ctx.energy.transmit_energy(payload, mu)
    return total


def evaluate_cost(S: DecisionSet, ctx: DecisionContext, cfg: ControllerConfig,
                  cache: _StepCache | None = None) -> CostBreakdown:
    """Expected posterior trace plus weighted energy of one candidate decision."""
    if cache is None:
        cache = _StepCache(ctx)
    et = expected_posterior_trace(ctx.P_next_prior, S, ctx, cache, cfg.outcome_cap)
    en = decision_energy(S, ctx)
    return CostBreakdown(expected_trace=et, energy=en, total=et + cfg.energy_weight * en)


def _power_rate_candidates(m: int, ctx: DecisionContext, cfg: ControllerConfig):
    """(du, u, b) grid for one sensor, deduplicated after clamping."""
    out = []
    seen = set()
    cap = ctx.energy.u_max[m]
    for du in cfg.increment_set:
        u = apply_increment(ctx.u_prev[m], du, cap)
        for b in ctx.model.sensors[m].rate_set:
            if (u, b) in seen:
                continue
            seen.add((u, b))
            out.append((du, u, b))
    return out


def _mdc_variants(b: float, cfg: ControllerConfig):
    for J in cfg.mdc_descriptions:
        for a in cfg.shared_bits_grid(b, J):
            yield SchemeSpec(kind="mdc", total_rate=b, descriptions=J, shared_bits=a)


def _stage1_scheme(m: int, u: float, b: float, ctx: DecisionContext,
                   cfg: ControllerConfig, cache: _StepCache) -> SchemeSpec:
    """Best of SDC vs the MDC family by expected measurement distortion."""
    sdc = SchemeSpec(kind="sdc", total_rate=b)
    if "mdc" not in cfg.scheme_menu or u <= 0.0:
        return sdc
    belief = ctx.beliefs[("s", m)]
    svar = float(ctx.source_var[m])

    def exp_dist(scheme):
        return sum(
            p * expected_scheme_distortion(scheme, packet_success(u, g2, scheme.packet_bits(), ctx.ber), svar)
            for g2, p in belief.support
        )

    best, best_d = sdc, exp_dist(sdc)
    for scheme in _mdc_variants(b, cfg):
        d = exp_dist(scheme)
        if d < best_d:
            best, best_d = scheme, d
    return best


def _zec_joint_variants(sensors: tuple[SensorDecision, ...], ctx: DecisionContext):
    """All dominant assignments across the SDC sensors of one joint candidate."""
    sdc_idx = [m for m, sd in enumerate(sensors) if sd.scheme.kind == "sdc"]
    if len(sdc_idx) < 2:
        return
    for dom in sdc_idx:
        new = list(sensors)
        for m in sdc_idx:
            if m == dom:
                continue
            b = sensors[m].scheme.total_rate
            tx = ctx.zec_tx_rate(m, dom, b)
            new[m] = replace(sensors[m], scheme=SchemeSpec(
                kind="zec", total_rate=b, dominant=dom, tx_rate=tx))
        yield tuple(new)


def optimize(ctx: DecisionContext, cfg: ControllerConfig):
    """Return the cost-minimizing DecisionSet and its cost breakdown.

    Two-stage mode pre-selects SDC-vs-MDC per sensor and rate, then
    joins ZEC pairings and relay on/off over the reduced lattice;
    exhaustive mode enumerates every admissible combination.  Ties break
    toward lower energy, then fewer transmitted bits, then enumeration
    order, so runs are reproducible.
    """
    M = ctx.model.n_sensors
    cache = _StepCache(ctx)

    per_sensor: list[list[SensorDecision]] = []
    for m in range(M):
        opts = []
        for du, u, b in _power_rate_candidates(m, ctx, cfg):
            if cfg.search == "two_stage":
                opts.append(SensorDecision(du=du, u=u, scheme=_stage1_scheme(m, u, b, ctx, cfg, cache)))
            else:
                opts.append(SensorDecision(du=du, u=u, scheme=SchemeSpec(kind="sdc", total_rate=b)))
                if "mdc" in cfg.scheme_menu:
                    opts.extend(
                        SensorDecision(du=du, u=u, scheme=sc) for sc in _mdc_variants(b, cfg)
                    )
        per_sensor.append(opts)
    if any(not opts for opts in per_sensor):
        raise ConfigurationError("empty admissible decision set")

    relay_patterns = list(itertools.product(*[(0.0, cap) for cap in ctx.mu_max])) or [()]

    best = None
    best_key = None
    seq = 0
    for joint in itertools.product(*per_sensor):
        variants = [joint]
        if "zec" in cfg.scheme_menu:
            variants.extend(_zec_joint_variants(joint, ctx))
        for sensors in variants:
            for relays in relay_patterns:
                S = DecisionSet(sensors=sensors, relays=relays)
                cost = evaluate_cost(S, ctx, cfg, cache)
                tx_total = sum(sd.scheme.transmitted_bits() for sd in sensors)
                key = (cost.total, cost.energy, tx_total, seq)
                seq += 1
                if best_key is None or key < best_key:
                    best, best_key = (S, cost), key
    return best


SIMPLE_BIT_TABLE = ((-110.0, 8.0), (-120.0, 6.0), (-130.0, 4.0))
SIMPLE_FLOOR_BITS = 3.0


def simple_logic(g_pred, u_prev, ctx: DecisionContext, cfg: ControllerConfig) -> DecisionSet:
    """Channel-inverting baseline: threshold rule on power, dB table on bits.

    A power step that would leave [0, cap] keeps the previous level.
    Always single-description coding, relays off.
    """
    delta = cfg.simple_delta if cfg.simple_delta is not None else max(abs(d) for d in cfg.increment_set)
    sensors = []
    for m, g2 in enumerate(g_pred):
        if g2 * u_prev[m] > cfg.simple_threshold:
            du = -delta
        else:
            du = delta
        u = u_prev[m] + du
        if u < 0.0 or u > ctx.energy.u_max[m]:
            du, u = 0.0, u_prev[m]
        db = power_to_db(g2) if g2 > 0 else -math.inf
        bits = SIMPLE_FLOOR_BITS
        for threshold, value in SIMPLE_BIT_TABLE:
            if db >= threshold:
                bits = value
                break
        sensors.append(SensorDecision(du=du, u=u, scheme=SchemeSpec(kind="sdc", total_rate=bits)))
    return DecisionSet(sensors=tuple(sensors), relays=tuple(0.0 for _ in ctx.mu_max))
