"""Transmission realization: arrival draws, reconstruction flags, energy.

A relay overhears every sensor packet, XORs the payloads bit-wise (after
zero-padding to the longest) and forwards the combination.  It transmits
only when switched on and when it received every sensor payload, so the
gateway can peel a single missing payload out of the XOR.
"""

from dataclasses import dataclass

import numpy as np

from .channel import BerModel, packet_success
from .errors import ConfigurationError


@dataclass(frozen=True)
class TransmissionOutcome:
    """Realized arrival bits for one slot.

    gamma[m][i]: description i of sensor m arrived at the gateway.
    zeta[m][l]: sensor m's packet arrived at relay l.
    gamma_tilde[l]: relay l's combination arrived at the gateway (0 when
    the relay did not transmit).
    relay_transmitted[l]: the relay was on and had every payload.
    """

    gamma: tuple[tuple[int, ...], ...]
    zeta: tuple[tuple[int, ...], ...]
    gamma_tilde: tuple[int, ...]
    relay_transmitted: tuple[int, ...] = ()

    def received_count(self, m: int) -> int:
        return sum(self.gamma[m])


@dataclass(frozen=True)
class ReconstructionFlags:
    """Which quantized measurements the gateway can reconstruct."""

    theta: tuple[int, ...]
    received_count: tuple[int, ...]

    def __post_init__(self):
        if any(t not in (0, 1) for t in self.theta):
            raise ConfigurationError("flags must be 0/1")


@dataclass(frozen=True)
class EnergyParams:
    """Radio energy model: E = bits * power / bit_rate + processing, when on."""

    bit_rate: float = 1e8
    processing: float = 0.0
    u_max: tuple[float, ...] = ()
    mu_max: tuple[float, ...] = ()

    def __post_init__(self):
        if self.bit_rate <= 0:
            raise ConfigurationError("channel bit-rate must be > 0")
        if self.processing < 0:
            raise ConfigurationError("processing energy must be >= 0")
        if any(c <= 0 for c in self.u_max) or any(c <= 0 for c in self.mu_max):
            raise ConfigurationError("power caps must be > 0")

    def transmit_energy(self, bits: float, power: float) -> float:
        if power <= 0.0:
            return 0.0
        return bits * power / self.bit_rate + self.processing


def draw_outcomes(decisions, gains, ber_model: BerModel, uniforms) -> TransmissionOutcome:
    """Draw one slot of arrival bits.

    `decisions` is a DecisionSet; `gains` maps link keys ("s", m),
    ("sr", m, l) and ("r", l) to truth power gains.  `uniforms` supplies
    the common-random-number draws: uniforms["s"][m][i], uniforms["sr"][m][l],
    uniforms["r"][l].  A relay only transmits if it is on and received
    every sensor payload.
    """
    M = len(decisions.sensors)
    L = len(decisions.relays)

    gamma = []
    for m, sd in enumerate(decisions.sensors):
        lam = packet_success(sd.u, gains[("s", m)], sd.scheme.packet_bits(), ber_model) \
            if sd.u > 0 else 0.0
        bits = tuple(int(uniforms["s"][m][i] < lam) for i in range(sd.scheme.packets))
        gamma.append(bits)

    zeta = []
    for m, sd in enumerate(decisions.sensors):
        row = []
        for l in range(L):
            p = packet_success(sd.u, gains[("sr", m, l)], sd.scheme.packet_bits(), ber_model) \
                if sd.u > 0 else 0.0
            row.append(int(uniforms["sr"][m][l] < p))
        zeta.append(tuple(row))

    gamma_tilde = []
    relay_tx = []
    for l, mu in enumerate(decisions.relays):
        has_all = all(zeta[m][l] == 1 for m in range(M)) if M else False
        tx = mu > 0.0 and has_all
        relay_tx.append(int(tx))
        if tx:
            payload = relay_payload_bits(
                [decisions.sensors[m].scheme.packet_bits() for m in range(M)]
            )
            p = packet_success(mu, gains[("r", l)], payload, ber_model)
            gamma_tilde.append(int(uniforms["r"][l] < p))
        else:
            gamma_tilde.append(0)

    return TransmissionOutcome(
        gamma=tuple(gamma),
        zeta=tuple(zeta),
        gamma_tilde=tuple(gamma_tilde),
        relay_transmitted=tuple(relay_tx),
    )


def reconstruct_flags(outcome: TransmissionOutcome, schemes, relay_enabled: bool) -> ReconstructionFlags:
    """Derive the reconstruction flags theta from one slot's arrivals.

    SDC: the single packet must arrive.  MDC: at least one description.
    ZEC: the dependent sensor additionally needs its dominant sensor's
    packet.  With relaying, a sensor is also recovered when some relay's
    XOR arrived and every other sensor payload arrived directly.
    """
    M = len(schemes)
    if len(outcome.gamma) != M:
        raise ConfigurationError("outcome/scheme sensor counts differ")
    direct = []
    counts = []
    for m, sc in enumerate(schemes):
        got = sum(outcome.gamma[m])
        if len(outcome.gamma[m]) != sc.packets:
            raise ConfigurationError(f"sensor {m}: {len(outcome.gamma[m])} bits for {sc.packets} packets")
        counts.append(got)
        direct.append(int(got >= 1))

    theta = list(direct)
    for m, sc in enumerate(schemes):
        if sc.kind == "zec":
            theta[m] = direct[m] * direct[sc.dominant]

    if relay_enabled and outcome.gamma_tilde:
        if any(sc.kind != "sdc" for sc in schemes):
            raise ConfigurationError("relaying requires single-description coding")
        for m in range(M):
            if theta[m]:
                continue
            others_ok = all(direct[j] for j in range(M) if j != m)
            if others_ok and any(outcome.gamma_tilde):
                theta[m] = 1
                counts[m] = 1
    return ReconstructionFlags(theta=tuple(theta), received_count=tuple(counts))


def relay_payload_bits(received_lengths) -> float:
    """Length of the relay's XOR payload: the longest (zero-padded) input."""
    lengths = list(received_lengths)
    if not lengths:
        raise ConfigurationError("relay payload needs at least one received packet")
    return float(max(lengths))


def step_energy(decisions, relay_payloads, params: EnergyParams) -> float:
    """Realized energy of one slot, joules.

    `relay_payloads` maps relay index -> payload bits for relays that
    actually transmitted; relays that were on but silent spend nothing.
    """
    total = 0.0
    for m, sd in enumerate(decisions.sensors):
        if params.u_max and sd.u > params.u_max[m] * (1 + 1e-12):
            raise ConfigurationError(f"sensor {m} power {sd.u} exceeds cap {params.u_max[m]}")
        if sd.u > 0.0:
            total += params.transmit_energy(sd.scheme.transmitted_bits(), sd.u)
    for l, mu in enumerate(decisions.relays):
        if params.mu_max and mu > params.mu_max[l] * (1 + 1e-12):
            raise ConfigurationError(f"relay {l} power {mu} exceeds cap {params.mu_max[l]}")
        if mu > 0.0 and l in relay_payloads:
            total += params.transmit_energy(relay_payloads[l], mu)
    return total
