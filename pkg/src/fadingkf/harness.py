"""Scenario configuration, closed-loop driver, traces and experiment suites.

A scenario file fully determines a run: plant (truth and optional design
model), per-link fading models and prediction modes, controller tuning,
energy accounting, horizon and master seed.  Runs are deterministic
given the seed; controller comparisons share every noise realization.
"""

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .analysis import RunMetrics, bound_constants, bound_curve, compute_metrics, rank_mask, spectral_norm
from .channel import (
    ArLinkModel,
    BerModel,
    FsmcModel,
    GainBelief,
    LinkState,
    ar_step,
    build_fsmc_from_trace,
    fsmc_belief,
    packet_success,
    power_to_db,
    stationary_link_state,
)
from .codec import QuantizerSpec, expected_scheme_distortion, quantize, SchemeSpec, sdc_distortion
from .controller import (
    ControllerConfig,
    DecisionContext,
    DecisionSet,
    SensorDecision,
    evaluate_cost,
    optimize,
    simple_logic,
)
from .errors import ConfigurationError
from .kalman import FilterState, kf_update, stack_measurement
from .link import EnergyParams, draw_outcomes, reconstruct_flags, relay_payload_bits, step_energy
from .plant import PlantModel, SensorSpec, gaussian_sample, source_variances
from .rng import RandomStreams

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class LinkSpec:
    """Fading model plus the controller's prediction mode for one link."""

    ar: ArLinkModel
    mode: object  # "known" | "predicted" | ("fixed", dB) | "fsmc"


@dataclass
class Scenario:
    name: str
    seed: int
    horizon: int
    plant: PlantModel
    design_plant: PlantModel
    source_var: np.ndarray  # per-sensor variance used for quantizer scaling
    ber: BerModel
    sensor_gw: tuple[LinkSpec, ...]
    sensor_relay: tuple[tuple[LinkSpec, ...], ...]  # [m][l]
    relay_gw: tuple[LinkSpec, ...]
    mu_max: tuple[float, ...]
    energy: EnergyParams
    controller_type: str  # "predictive" | "simple"
    cfg: ControllerConfig
    u_init: tuple[float, ...]
    b_init: float
    fsmc_states: int = 12
    fsmc_training_steps: int = 20000
    raw: dict = field(default_factory=dict)

    def config_hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.raw, sort_keys=True, separators=(",", ":")).encode()
        ).hexdigest()[:16]


def _mat(d, key, ctx):
    try:
        return np.asarray(d[key], dtype=float)
    except KeyError:
        raise ConfigurationError(f"{ctx}: missing key {key!r}") from None
    except (TypeError, ValueError):
        raise ConfigurationError(f"{ctx}: {key!r} must be numeric") from None


def _parse_plant(d, ctx="plant") -> PlantModel:
    sensors = []
    for m, s in enumerate(d.get("sensors", [])):
        sensors.append(SensorSpec(
            C=_mat(s, "C", f"{ctx}.sensors[{m}]"),
            R=float(s.get("R", 0.0)),
            rate_set=tuple(float(b) for b in s.get("rates", [])),
        ))
    return PlantModel(A=_mat(d, "A", ctx), Q=_mat(d, "Q", ctx), P0=_mat(d, "P0", ctx),
                      sensors=tuple(sensors))


def _parse_mode(raw):
    if isinstance(raw, str) and raw.startswith("fixed:"):
        return ("fixed", float(raw.split(":", 1)[1]))
    if raw in ("known", "predicted", "fsmc"):
        return raw
    raise ConfigurationError(f"unknown link mode {raw!r}")


def _parse_link(d, ctx) -> LinkSpec:
    try:
        ar = ArLinkModel.from_mean_power(a=float(d["a"]), mean_power_dB=float(d["mean_db"]))
    except KeyError as exc:
        raise ConfigurationError(f"{ctx}: missing key {exc}") from None
    return LinkSpec(ar=ar, mode=_parse_mode(d.get("mode", "predicted")))


def load_scenario(cfg: dict) -> Scenario:
    """Validate and build a Scenario from a parsed config mapping."""
    try:
        plant = _parse_plant(cfg["plant"])
    except KeyError:
        raise ConfigurationError("missing 'plant' section") from None
    design = _parse_plant(cfg["design_plant"]) if cfg.get("design_plant") else plant
    if design.n != plant.n or design.n_sensors != plant.n_sensors:
        raise ConfigurationError("design_plant must match plant dimensions")
    M = plant.n_sensors

    if cfg.get("source_var"):
        sv = np.asarray(cfg["source_var"], dtype=float)
        if sv.shape != (M,):
            raise ConfigurationError(f"source_var must list {M} values")
    else:
        sv = source_variances(design)

    ber_cfg = cfg.get("ber", {})
    ber = BerModel(kind=ber_cfg.get("kind", "exponential"),
                   beta0=float(ber_cfg.get("beta0", 0.01)),
                   n0=float(ber_cfg.get("n0", 2.5e-16)))

    links = cfg.get("links", {})
    sgw_raw = links.get("sensor_gw", [])
    if len(sgw_raw) != M:
        raise ConfigurationError(f"links.sensor_gw must list {M} links")
    sensor_gw = tuple(_parse_link(d, f"links.sensor_gw[{m}]") for m, d in enumerate(sgw_raw))

    mu_max = tuple(float(v) for v in cfg.get("relays", {}).get("mu_max", []))
    L = len(mu_max)
    sr_raw = links.get("sensor_relay", [])
    rg_raw = links.get("relay_gw", [])
    if L:
        if len(sr_raw) != M or any(len(row) != L for row in sr_raw):
            raise ConfigurationError(f"links.sensor_relay must be {M}x{L}")
        if len(rg_raw) != L:
            raise ConfigurationError(f"links.relay_gw must list {L} links")
    sensor_relay = tuple(
        tuple(_parse_link(d, f"links.sensor_relay[{m}][{l}]") for l, d in enumerate(row))
        for m, row in enumerate(sr_raw[:M] if L else [])
    )
    relay_gw = tuple(_parse_link(d, f"links.relay_gw[{l}]") for l, d in enumerate(rg_raw if L else []))

    e_cfg = cfg.get("energy", {})
    u_max = tuple(float(v) for v in e_cfg.get("u_max", []))
    if len(u_max) != M:
        raise ConfigurationError(f"energy.u_max must list {M} caps")
    energy = EnergyParams(bit_rate=float(e_cfg.get("bit_rate", 1e8)),
                          processing=float(e_cfg.get("processing", 0.0)),
                          u_max=u_max, mu_max=mu_max)

    c_cfg = cfg.get("controller", {})
    ctype = c_cfg.get("type", "predictive")
    if ctype not in ("predictive", "simple"):
        raise ConfigurationError(f"unknown controller type {ctype!r}")
    menu = tuple(c_cfg.get("menu", ["sdc"]))
    if L and menu != ("sdc",):
        raise ConfigurationError("relay scenarios require menu == ['sdc']")
    shared = tuple(
        "max" if a == "max" else float(a) for a in c_cfg.get("mdc_shared_bits", [0, 1, 2, "max"])
    )
    if float(c_cfg.get("signaling_weight", 0.0)) != 0.0:
        raise ConfigurationError(
            "controller.signaling_weight is reserved; the downlink signaling "
            "cost term is not implemented")
    controller_cfg = ControllerConfig(
        energy_weight=float(c_cfg.get("energy_weight", 0.0)),
        increment_set=tuple(float(v) for v in c_cfg.get("increments", [3e-5, -3e-5])),
        search=c_cfg.get("search", "two_stage"),
        scheme_menu=menu,
        mdc_descriptions=tuple(int(j) for j in c_cfg.get("mdc_descriptions", [2, 3])),
        mdc_shared_bits=shared,
        outcome_cap=int(c_cfg.get("outcome_cap", 2**16)),
        simple_threshold=float(c_cfg.get("simple_threshold", 2e-15)),
        simple_delta=(float(c_cfg["simple_delta"]) if "simple_delta" in c_cfg else None),
    )
    u_init = tuple(float(v) for v in c_cfg.get("u_init", [cap / 2 for cap in u_max]))
    if len(u_init) != M:
        raise ConfigurationError(f"controller.u_init must list {M} powers")
    for m, (u0, cap) in enumerate(zip(u_init, u_max)):
        if not 0 <= u0 <= cap:
            raise ConfigurationError(f"controller.u_init[{m}]={u0} outside [0, {cap}]")
    b_init = float(c_cfg.get("b_init", max(plant.sensors[0].rate_set)))

    fsmc_cfg = cfg.get("fsmc", {})
    horizon = int(cfg.get("horizon", 0))
    if horizon < 1:
        raise ConfigurationError("horizon must be >= 1")
    if "seed" not in cfg:
        raise ConfigurationError("scenario must set a seed")

    return Scenario(
        name=str(cfg.get("name", "scenario")), seed=int(cfg["seed"]), horizon=horizon,
        plant=plant, design_plant=design, source_var=sv, ber=ber,
        sensor_gw=sensor_gw, sensor_relay=sensor_relay, relay_gw=relay_gw,
        mu_max=mu_max, energy=energy, controller_type=ctype, cfg=controller_cfg,
        u_init=u_init, b_init=b_init,
        fsmc_states=int(fsmc_cfg.get("states", 12)),
        fsmc_training_steps=int(fsmc_cfg.get("training_steps", 20000)),
        raw=cfg,
    )


def load_scenario_file(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as f:
        try:
            cfg = json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None
    return load_scenario(cfg)


@dataclass(frozen=True)
class TraceRecord:
    """One closed-loop step: channel state, decisions, outcomes, filter state."""

    schema: int
    k: int
    gain_db: tuple[float, ...]
    u: tuple[float, ...]
    rate: tuple[float, ...]
    scheme: tuple[str, ...]
    mdc_J: tuple[int, ...]
    mdc_a: tuple[float, ...]
    zec_dominant: tuple[int, ...]
    tx_bits: tuple[float, ...]
    relay_power: tuple[float, ...]
    relay_transmitted: tuple[int, ...]
    relay_received: tuple[int, ...]
    gamma: tuple[str, ...]
    zeta: tuple[str, ...]
    theta: tuple[int, ...]
    received_count: tuple[int, ...]
    tr_prior: float
    tr_post: float
    p_prior_norm: float
    energy: float
    cost_expected_trace: float
    cost_energy: float
    cost_total: float
    sq_error: float


def _link_keys(M: int, L: int):
    keys = [("s", m) for m in range(M)]
    keys += [("sr", m, l) for m in range(M) for l in range(L)]
    keys += [("r", l) for l in range(L)]
    return keys


class _ChannelTruth:
    """Pre-simulated complex gain trajectories for every link."""

    def __init__(self, sc: Scenario, streams: RandomStreams, extra: int = 1):
        self.trajectories = {}
        specs = {}
        M, L = sc.plant.n_sensors, len(sc.mu_max)
        for m in range(M):
            specs[("s", m)] = sc.sensor_gw[m]
        for m in range(M):
            for l in range(L):
                specs[("sr", m, l)] = sc.sensor_relay[m][l]
        for l in range(L):
            specs[("r", l)] = sc.relay_gw[l]
        self.specs = specs
        for key, spec in specs.items():
            name = "chan/" + "_".join(str(p) for p in key)
            rng = streams.stream(name)
            link = stationary_link_state(spec.ar, rng)
            traj = np.empty(sc.horizon + extra, dtype=complex)
            for k in range(sc.horizon + extra):
                link = ar_step(link, spec.ar, rng)
                traj[k] = link.g
            self.trajectories[key] = traj

    def power_gain(self, key, k: int) -> float:
        return float(abs(self.trajectories[key][k]) ** 2)

    def complex_gain(self, key, k: int) -> complex:
        return self.trajectories[key][k]


def _train_fsmc(sc: Scenario, streams: RandomStreams):
    """FSMC belief models for every link configured in fsmc mode."""
    models = {}
    M, L = sc.plant.n_sensors, len(sc.mu_max)
    specs = {("s", m): sc.sensor_gw[m] for m in range(M)}
    specs.update({("sr", m, l): sc.sensor_relay[m][l] for m in range(M) for l in range(L)})
    specs.update({("r", l): sc.relay_gw[l] for l in range(L)})
    for key, spec in specs.items():
        if spec.mode != "fsmc":
            continue
        name = "fsmc_train/" + "_".join(str(p) for p in key)
        rng = streams.stream(name)
        link = stationary_link_state(spec.ar, rng)
        trace = np.empty(sc.fsmc_training_steps)
        for k in range(sc.fsmc_training_steps):
            link = ar_step(link, spec.ar, rng)
            trace[k] = link.power_gain
        models[key] = build_fsmc_from_trace(trace, sc.fsmc_states)
    return models


def _belief(spec: LinkSpec, truth: _ChannelTruth, key, k: int, fsmc_models) -> GainBelief:
    mode = spec.mode
    if mode == "known":
        return GainBelief.point(abs(truth.complex_gain(key, k + 1)) ** 2)
    if mode == "predicted":
        return GainBelief.point(abs(spec.ar.a * truth.complex_gain(key, k)) ** 2)
    if mode == "fsmc":
        return fsmc_belief(truth.power_gain(key, k), fsmc_models[key])
    if isinstance(mode, tuple) and mode[0] == "fixed":
        return GainBelief.point(10.0 ** (mode[1] / 10.0))
    raise ConfigurationError(f"unknown link mode {mode!r}")


def _initial_decision(sc: Scenario) -> DecisionSet:
    sensors = []
    for m in range(sc.plant.n_sensors):
        rates = sc.plant.sensors[m].rate_set
        b = sc.b_init if sc.b_init in rates else max(rates)
        sensors.append(SensorDecision(du=0.0, u=sc.u_init[m], scheme=SchemeSpec(kind="sdc", total_rate=b)))
    return DecisionSet(sensors=tuple(sensors), relays=tuple(0.0 for _ in sc.mu_max))


def _reconstruction(y: float, scheme: SchemeSpec, count: int, svar: float):
    """Realized reconstruction value and its modeled distortion."""
    if scheme.kind == "mdc":
        D = scheme.profile(svar).D[max(count, 1)]
        # equivalent-step quantization at the profile distortion
        step = math.sqrt(12.0 * D)
        return quantize(y, QuantizerSpec(step=step, source_var=svar)), D
    D = sdc_distortion(svar, scheme.total_rate)
    q = QuantizerSpec.for_rate(svar, scheme.total_rate)
    return quantize(y, q), D


def run_scenario(sc: Scenario, replication: int = 0):
    """Simulate the closed loop; returns (records, RunMetrics)."""
    streams = RandomStreams(sc.seed, replication)
    M, L, K = sc.plant.n_sensors, len(sc.mu_max), sc.horizon
    n = sc.plant.n

    truth = _ChannelTruth(sc, streams)
    fsmc_models = _train_fsmc(sc, streams)

    x0 = gaussian_sample(streams.stream("plant/x0"), sc.plant.P0)
    w = gaussian_sample(streams.stream("plant/w"), sc.plant.Q, size=K)
    x = np.empty((K, n))
    x[0] = x0
    for k in range(1, K):
        x[k] = sc.plant.A @ x[k - 1] + w[k - 1]
    y = np.empty((K, M))
    for m in range(M):
        v = streams.normals(f"sensor/{m}/v", K) * math.sqrt(sc.plant.sensors[m].R)
        y[:, m] = x @ sc.plant.sensors[m].C + v

    J_max = max(sc.cfg.mdc_descriptions) if "mdc" in sc.cfg.scheme_menu else 1
    arr_s = [streams.uniforms(f"arrive/s{m}", (K, J_max)) for m in range(M)]
    arr_sr = [[streams.uniforms(f"arrive/sr{m}_{l}", K) for l in range(L)] for m in range(M)]
    arr_r = [streams.uniforms(f"arrive/r{l}", K) for l in range(L)]

    meas_cov = None
    if "zec" in sc.cfg.scheme_menu:
        C = sc.design_plant.C_matrix()
        from .plant import stationary_covariance

        S = stationary_covariance(sc.design_plant)
        meas_cov = C @ S @ C.T + np.diag([s.R for s in sc.design_plant.sensors])

    fs = FilterState.initial(sc.design_plant)
    S_k = _initial_decision(sc)
    link_keys = _link_keys(M, L)
    records = []

    for k in range(K):
        gains_k = {key: truth.power_gain(key, k) for key in link_keys}
        uniforms = {
            "s": [arr_s[m][k] for m in range(M)],
            "sr": [[arr_sr[m][l][k] for l in range(L)] for m in range(M)],
            "r": [arr_r[l][k] for l in range(L)],
        }
        outcome = draw_outcomes(S_k, gains_k, sc.ber, uniforms)
        schemes = [sd.scheme for sd in S_k.sensors]
        flags = reconstruct_flags(outcome, schemes, relay_enabled=L > 0)

        y_hat = np.zeros(M)
        dists = np.zeros(M)
        for m in range(M):
            val, D = _reconstruction(y[k, m], schemes[m], flags.received_count[m],
                                     float(sc.source_var[m]))
            dists[m] = D
            if flags.theta[m]:
                y_hat[m] = val
        meas = stack_measurement(flags, y_hat, schemes, dists, sc.design_plant)

        tr_prior = float(np.trace(fs.P_prior))
        p_prior_norm = spectral_norm(fs.P_prior)
        fs = kf_update(fs, meas, sc.design_plant)
        tr_post = float(np.trace(fs.P_post))
        sq_error = float(np.sum((x[k] - fs.x_hat) ** 2))

        payloads = {}
        for l in range(L):
            if outcome.relay_transmitted[l]:
                payloads[l] = relay_payload_bits([sd.scheme.packet_bits() for sd in S_k.sensors])
        energy_k = step_energy(S_k, payloads, sc.energy)

        beliefs = {
            key: _belief(truth.specs[key], truth, key, k, fsmc_models) for key in link_keys
        }
        ctx = DecisionContext(
            model=sc.design_plant, source_var=sc.source_var, P_next_prior=fs.P_prior,
            u_prev=tuple(sd.u for sd in S_k.sensors), beliefs=beliefs, ber=sc.ber,
            energy=sc.energy, meas_cov=meas_cov, mu_max=sc.mu_max,
        )
        if sc.controller_type == "simple":
            g_pred = [
                sum(g2 * p for g2, p in beliefs[("s", m)].support) for m in range(M)
            ]
            S_next = simple_logic(g_pred, ctx.u_prev, ctx, sc.cfg)
            cost = evaluate_cost(S_next, ctx, sc.cfg)
        else:
            S_next, cost = optimize(ctx, sc.cfg)

        records.append(TraceRecord(
            schema=SCHEMA_VERSION, k=k,
            gain_db=tuple(power_to_db(gains_k[key]) for key in link_keys),
            u=tuple(sd.u for sd in S_k.sensors),
            rate=tuple(sd.scheme.total_rate for sd in S_k.sensors),
            scheme=tuple(sd.scheme.kind for sd in S_k.sensors),
            mdc_J=tuple(sd.scheme.descriptions if sd.scheme.kind == "mdc" else 0 for sd in S_k.sensors),
            mdc_a=tuple(sd.scheme.shared_bits if sd.scheme.kind == "mdc" else 0.0 for sd in S_k.sensors),
            zec_dominant=tuple(
                sd.scheme.dominant if sd.scheme.kind == "zec" else -1 for sd in S_k.sensors),
            tx_bits=tuple(sd.scheme.transmitted_bits() for sd in S_k.sensors),
            relay_power=S_k.relays,
            relay_transmitted=outcome.relay_transmitted,
            relay_received=outcome.gamma_tilde,
            gamma=tuple("".join(str(b) for b in outcome.gamma[m]) for m in range(M)),
            zeta=tuple("".join(str(outcome.zeta[m][l]) for l in range(L)) for m in range(M)),
            theta=flags.theta,
            received_count=flags.received_count,
            tr_prior=tr_prior, tr_post=tr_post, p_prior_norm=p_prior_norm,
            energy=energy_k,
            cost_expected_trace=cost.expected_trace, cost_energy=cost.energy,
            cost_total=cost.total,
            sq_error=sq_error,
        ))
        S_k = S_next

    return records, compute_metrics(records)


# ---------------------------------------------------------------------------
# trace persistence

_TUPLE_FIELDS_FLOAT = ("gain_db", "u", "rate", "mdc_a", "tx_bits", "relay_power")
_TUPLE_FIELDS_INT = ("mdc_J", "zec_dominant", "relay_transmitted", "relay_received",
                     "theta", "received_count")
_TUPLE_FIELDS_STR = ("scheme", "gamma", "zeta")


def _flatten(record: TraceRecord) -> dict:
    row = {}
    for f in fields(TraceRecord):
        val = getattr(record, f.name)
        if isinstance(val, tuple):
            for i, v in enumerate(val):
                row[f"{f.name}_{i}"] = repr(float(v)) if isinstance(v, (float, np.floating)) else v
        elif isinstance(val, (float, np.floating)):
            row[f.name] = repr(float(val))
        else:
            row[f.name] = val
    return row


def write_trace_csv(path, records) -> None:
    if not records:
        raise ConfigurationError("cannot write an empty trace")
    rows = [_flatten(r) for r in records]
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def parse_trace_csv(path) -> list[TraceRecord]:
    with open(path, "r", newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        rows = list(reader)
    records = []
    for row in rows:
        kwargs = {}
        for f in fields(TraceRecord):
            if f.name in _TUPLE_FIELDS_FLOAT or f.name in _TUPLE_FIELDS_INT or f.name in _TUPLE_FIELDS_STR:
                vals = []
                i = 0
                while f"{f.name}_{i}" in row:
                    raw = row[f"{f.name}_{i}"]
                    if f.name in _TUPLE_FIELDS_FLOAT:
                        vals.append(float(raw))
                    elif f.name in _TUPLE_FIELDS_INT:
                        vals.append(int(raw))
                    else:
                        vals.append(raw)
                    i += 1
                kwargs[f.name] = tuple(vals)
            elif f.name in ("schema", "k"):
                kwargs[f.name] = int(row[f.name])
            else:
                kwargs[f.name] = float(row[f.name])
        if kwargs["schema"] != SCHEMA_VERSION:
            raise ConfigurationError(
                f"trace schema {kwargs['schema']} != supported {SCHEMA_VERSION}")
        records.append(TraceRecord(**kwargs))
    return records


def write_summary(path, sc: Scenario, metrics: RunMetrics, extra: dict | None = None) -> None:
    doc = {
        "schema": SCHEMA_VERSION,
        "name": sc.name,
        "seed": sc.seed,
        "config_hash": sc.config_hash(),
        "metrics": metrics.as_dict(),
    }
    if extra:
        doc.update(extra)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


# ---------------------------------------------------------------------------
# experiment suites

def scenario_variant(sc: Scenario, **overrides) -> Scenario:
    """Copy of the scenario with controller-level overrides applied."""
    cfg_overrides = {}
    for key in ("scheme_menu", "search", "energy_weight"):
        if key in overrides:
            cfg_overrides[key] = overrides.pop(key)
    stamp = {k: str(v) for k, v in {**overrides, **cfg_overrides}.items()}
    new = replace(sc, raw={**sc.raw, "_overrides": stamp}, **overrides)
    if cfg_overrides:
        new.cfg = replace(sc.cfg, **cfg_overrides)
    return new


def compare_controllers(sc: Scenario, variants) -> list[dict]:
    """Run labeled controller variants under common random numbers.

    `variants` maps labels to override dicts accepted by
    `scenario_variant` (menu, search, controller type, energy weight).
    The first row is the baseline for the relative-gain columns.
    """
    rows = []
    base = None
    for label, overrides in variants:
        variant = scenario_variant(sc, **overrides)
        _, metrics = run_scenario(variant)
        row = {"label": label, **metrics.as_dict()}
        if base is None:
            base = metrics
            row["V_gain_pct"] = 0.0
            row["energy_gain_pct"] = 0.0
        else:
            row["V_gain_pct"] = 100.0 * (base.V_bar - metrics.V_bar) / base.V_bar
            row["energy_gain_pct"] = 100.0 * (base.E_total - metrics.E_total) / base.E_total
        rows.append(row)
    return rows


def sweep(sc: Scenario, parameter: str, grid) -> list[dict]:
    """One run per grid value of the given parameter, common seeds."""
    if parameter != "energy_weight":
        raise ConfigurationError(f"unsupported sweep parameter {parameter!r}")
    if not len(grid):
        raise ConfigurationError("sweep grid must be non-empty")
    rows = []
    for value in grid:
        variant = scenario_variant(sc, energy_weight=float(value))
        _, metrics = run_scenario(variant)
        rows.append({"energy_weight": float(value), **metrics.as_dict()})
    return rows


def match_energy(sc: Scenario, target_energy: float, lo: float, hi: float,
                 tol: float = 0.01, max_iter: int = 24):
    """Bisect the energy weight until total energy matches the target.

    Energy spend is non-increasing in the weight; returns (weight,
    records, metrics) of the matched run.
    """
    def total(w):
        records, metrics = run_scenario(scenario_variant(sc, energy_weight=w))
        return records, metrics

    rec_lo, met_lo = total(lo)
    if met_lo.E_total < target_energy * (1 - tol):
        return lo, rec_lo, met_lo  # cannot spend more than the lo-weight run
    rec_hi, met_hi = total(hi)
    expand = 0
    while met_hi.E_total > target_energy and expand < 6:
        hi *= 10.0
        rec_hi, met_hi = total(hi)
        expand += 1
    best = None
    for _ in range(max_iter):
        mid = math.sqrt(lo * hi)
        rec, met = total(mid)
        if abs(met.E_total - target_energy) <= tol * target_energy:
            return mid, rec, met
        if best is None or abs(met.E_total - target_energy) < abs(best[2].E_total - target_energy):
            best = (mid, rec, met)
        if met.E_total > target_energy:
            lo = mid
        else:
            hi = mid
    return best


def estimate_nu_closed_loop(sc: Scenario, samples: int = 2000, max_states: int | None = None):
    """Monte-Carlo outage estimate over the (P, g) states one run visits.

    Runs the closed loop once, derives each visited state's per-sensor
    reconstruction probabilities from the executed decision and realized
    gains, and Monte-Carlo samples flag patterns per state.  Returns
    (max estimate, per-state estimates).
    """
    from .analysis import estimate_nu

    records, _ = run_scenario(sc)
    if max_states is not None:
        records = records[:max_states]
    mask = rank_mask(sc.design_plant)
    per_state = [_record_theta_probs(r, sc) for r in records]
    rng = RandomStreams(sc.seed).stream("nu_estimation")
    return estimate_nu(per_state, mask, samples, rng)


def _record_theta_probs(r: TraceRecord, sc: Scenario) -> list[float]:
    """Per-sensor reconstruction probability implied by one executed decision.

    Relay recovery is ignored, which can only overestimate the outage
    probability (a conservative decay rate).
    """
    probs = []
    for m in range(sc.plant.n_sensors):
        if r.u[m] <= 0:
            probs.append(0.0)
            continue
        g2 = 10.0 ** (r.gain_db[m] / 10.0)
        if r.mdc_J[m]:
            lam = packet_success(r.u[m], g2, r.tx_bits[m] / r.mdc_J[m], sc.ber)
            probs.append(1.0 - (1.0 - lam) ** r.mdc_J[m])
        else:
            probs.append(packet_success(r.u[m], g2, r.tx_bits[m], sc.ber))
    for m in range(sc.plant.n_sensors):
        dom = r.zec_dominant[m]
        if dom >= 0:
            probs[m] = probs[m] * probs[dom]
    return probs


def outage_probability(theta_probs, mask) -> float:
    """Probability the stacked observation matrix is rank deficient."""
    total = 0.0
    for theta, ok in mask.items():
        if ok:
            continue
        total += math.prod(p if t else 1.0 - p for t, p in zip(theta, theta_probs))
    return total


def verify_bound(sc: Scenario, replications: int, k_max: int | None = None) -> dict:
    """Monte-Carlo check of the exponential covariance bound.

    Runs the closed loop `replications` times, averages the prior
    covariance spectral norm per step, sets the decay rate from the
    worst visited outage probability, and compares against the curve.
    """
    horizon = min(k_max, sc.horizon) if k_max is not None else sc.horizon
    sc_run = replace(sc, horizon=horizon)
    mask = rank_mask(sc.design_plant)

    norms = np.zeros(horizon)
    nu_max = 0.0
    for rep in range(replications):
        records, _ = run_scenario(sc_run, replication=rep)
        for r in records:
            norms[r.k] += r.p_prior_norm
            nu_max = max(nu_max, outage_probability(_record_theta_probs(r, sc), mask))
    norms /= replications

    a_norm2 = spectral_norm(sc.design_plant.A) ** 2
    rho = nu_max * a_norm2
    params = bound_constants(sc.design_plant, sc.source_var)
    report = {
        "c": params.c,
        "varpi": params.varpi,
        "a_norm2": a_norm2,
        "nu_max": nu_max,
        "rho": rho,
        "replications": replications,
        "k_max": horizon,
    }
    if rho >= 1.0:
        report["pass"] = False
        report["reason"] = "rho >= 1; bound hypothesis violated"
        return report
    params.decay_rate = rho
    curve = bound_curve(params, sc.design_plant.P0, sc.design_plant.Q, horizon - 1)
    ok = norms <= curve + 1e-12
    report["pass"] = bool(np.all(ok))
    report["first_violation"] = int(np.argmin(ok)) if not report["pass"] else -1
    report["empirical_norm"] = [float(v) for v in norms]
    report["bound"] = [float(v) for v in curve]
    return report
