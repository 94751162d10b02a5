"""Quantization and coding-scheme mathematics.

High-resolution uniform-quantizer rate/distortion for a Gaussian source,
conditional-entropy rates for zero-error coding across correlated
sensors, and a shared-refinement distortion family for symmetric
multiple-description coding.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

# (pi e / 6): Gaussian high-resolution distortion coefficient
HR_COEFF = math.pi * math.e / 6.0
ZEC_MIN_RATE = 0.5


def gaussian_entropy(source_var: float) -> float:
    """Differential entropy (bits) of a zero-mean Gaussian with given variance."""
    return 0.5 * math.log2(2.0 * math.pi * math.e * source_var)


def step_size_for_rate(source_var: float, b: float) -> float:
    """Uniform-quantizer step achieving rate b on a Gaussian source."""
    if source_var <= 0 or b <= 0:
        raise ConfigurationError("source variance and rate must be positive")
    return 2.0 ** (gaussian_entropy(source_var) - b)


def sdc_distortion(source_var: float, b: float) -> float:
    """Expected squared error of single-description coding at rate b.

    Equals step^2/12 for the step from `step_size_for_rate`.
    """
    if source_var <= 0 or b <= 0:
        raise ConfigurationError("source variance and rate must be positive")
    return HR_COEFF * source_var * 2.0 ** (-2.0 * b)


@dataclass(frozen=True)
class QuantizerSpec:
    """Mid-tread uniform quantizer with clipped support."""

    step: float
    source_var: float
    support_sigma: float = 6.0

    def __post_init__(self):
        if self.step <= 0:
            raise ConfigurationError("step must be > 0")
        if self.source_var <= 0:
            raise ConfigurationError("source variance must be > 0")
        if self.support_sigma < 4:
            raise ConfigurationError("support must be at least 4 sigma")

    @classmethod
    def for_rate(cls, source_var: float, b: float, support_sigma: float = 6.0) -> "QuantizerSpec":
        return cls(step=step_size_for_rate(source_var, b), source_var=source_var,
                   support_sigma=support_sigma)


def quantize(y: float, spec: QuantizerSpec) -> float:
    """Round y to the nearest step, ties away from zero, clipped support."""
    lim = spec.support_sigma * math.sqrt(spec.source_var)
    y = min(max(y, -lim), lim)
    q = y / spec.step
    return math.floor(abs(q) + 0.5) * math.copysign(1.0, q) * spec.step


def zec_rates(joint_cov, b_nominal, dominant: int):
    """Transmitted rates under zero-error coding of a correlated sensor pair.

    `joint_cov` is the 2x2 covariance of the measurement pair and
    `b_nominal` their nominal rates, in pair order; `dominant` (0 or 1)
    names the dominant coordinate.  The dominant sensor codes
    independently at its nominal rate; the dependent sensor's entropy
    coder is designed relative to the dominant one, so its rate drops by
    the Gaussian conditional-entropy saving, floored at 0.5 bit.
    Distortions are unchanged (same quantizers).
    """
    S = np.asarray(joint_cov, dtype=float)
    if S.shape != (2, 2):
        raise ConfigurationError("joint covariance must be 2x2")
    if abs(S[0, 1] - S[1, 0]) > 1e-12 * max(1.0, abs(S[0, 1])):
        raise ConfigurationError("joint covariance must be symmetric")
    if dominant not in (0, 1):
        raise ConfigurationError("dominant must be 0 or 1")
    dep = 1 - dominant
    var_dom, var_dep, cov = S[dominant, dominant], S[dep, dep], S[0, 1]
    if var_dom <= 0 or var_dep <= 0 or np.linalg.det(S) < -1e-12 * var_dom * var_dep:
        raise ConfigurationError("joint covariance must be positive semidefinite")
    cond_var = max(var_dep - cov * cov / var_dom, 0.0)
    if cond_var == 0.0:
        rate_dep = ZEC_MIN_RATE
    else:
        saving = 0.5 * math.log2(var_dep / cond_var)
        rate_dep = max(float(b_nominal[dep]) - saving, ZEC_MIN_RATE)
    return float(b_nominal[dominant]), float(rate_dep)


@dataclass(frozen=True)
class MdcProfile:
    """Distortion by received-description count for one MDC configuration.

    D[j] is the expected squared error given exactly j of the J
    descriptions arrive; D[0] is the source variance (nothing received).
    """

    per_description_rate: float
    D: tuple[float, ...]

    def __post_init__(self):
        D = tuple(float(d) for d in self.D)
        object.__setattr__(self, "D", D)
        if len(D) < 2:
            raise ConfigurationError("profile needs at least D[0], D[1]")
        if any(D[j + 1] > D[j] * (1 + 1e-12) for j in range(len(D) - 1)):
            raise ConfigurationError("distortion must not increase with received count")

    @property
    def descriptions(self) -> int:
        return len(self.D) - 1


_PROFILE_CACHE: dict = {}


def mdc_profile(source_var: float, b: float, J: int, a: float) -> MdcProfile:
    """Shared-refinement MDC distortion family.

    Each of the J equal-rate descriptions carries a common coarse layer
    of `a` bits plus an independent refinement of b/J - a bits, so j
    received descriptions are worth a + j(b/J - a) effective bits.
    """
    key = (source_var, b, J, a)
    cached = _PROFILE_CACHE.get(key)
    if cached is not None:
        return cached
    if J < 2:
        raise ConfigurationError("MDC needs at least 2 descriptions")
    if source_var <= 0 or b <= 0:
        raise ConfigurationError("source variance and rate must be positive")
    per_desc = b / J
    if not 0.0 <= a <= per_desc + 1e-12:
        raise ConfigurationError(f"shared bits a={a} outside [0, b/J={per_desc}]")
    a = min(a, per_desc)
    D = [source_var]
    for j in range(1, J + 1):
        D.append(sdc_distortion(source_var, a + j * (per_desc - a)))
    prof = MdcProfile(per_description_rate=per_desc, D=tuple(D))
    if len(_PROFILE_CACHE) < 100_000:
        _PROFILE_CACHE[key] = prof
    return prof


@dataclass(frozen=True)
class SchemeSpec:
    """Coding scheme of one sensor for one step.

    ``total_rate`` is the codebook rate b.  For MDC, `descriptions` and
    `shared_bits` select the profile.  For ZEC the sensor is the
    dependent one, `dominant` names its dominant sensor and `tx_rate`
    the reduced transmitted rate.
    """

    kind: str  # "sdc" | "zec" | "mdc"
    total_rate: float
    descriptions: int = 1
    shared_bits: float = 0.0
    dominant: int | None = None
    tx_rate: float | None = None

    def __post_init__(self):
        if self.kind not in ("sdc", "zec", "mdc"):
            raise ConfigurationError(f"unknown scheme kind {self.kind!r}")
        if self.total_rate <= 0:
            raise ConfigurationError("total rate must be > 0")
        if self.kind == "mdc":
            if self.descriptions < 2:
                raise ConfigurationError("MDC needs >= 2 descriptions")
            if not 0.0 <= self.shared_bits <= self.total_rate / self.descriptions + 1e-12:
                raise ConfigurationError("shared bits outside [0, b/J]")
        if self.kind == "zec" and self.dominant is None:
            raise ConfigurationError("ZEC scheme needs a dominant sensor index")

    @property
    def packets(self) -> int:
        """Number of packets transmitted per step."""
        return self.descriptions if self.kind == "mdc" else 1

    def packet_bits(self) -> float:
        """Length of each transmitted packet."""
        if self.kind == "mdc":
            return self.total_rate / self.descriptions
        if self.kind == "zec" and self.tx_rate is not None:
            return self.tx_rate
        return self.total_rate

    def transmitted_bits(self) -> float:
        """Total bits sent this step (energy-relevant)."""
        return self.packet_bits() * self.packets

    def profile(self, source_var: float) -> MdcProfile:
        if self.kind != "mdc":
            raise ConfigurationError("distortion profile only defined for MDC")
        return mdc_profile(source_var, self.total_rate, self.descriptions, self.shared_bits)

    def distortion(self, source_var: float, received: int = 1) -> float:
        """Modeled reconstruction distortion given `received` packets."""
        if self.kind == "mdc":
            return self.profile(source_var).D[received]
        return sdc_distortion(source_var, self.total_rate)


def _binom_pmf(J: int, p: float) -> list[float]:
    q = 1.0 - p
    return [math.comb(J, j) * p**j * q ** (J - j) for j in range(J + 1)]


def expected_scheme_distortion(scheme: SchemeSpec, per_packet_success: float, source_var: float) -> float:
    """Expected measurement-domain distortion before the Kalman filter.

    Single-packet schemes lose everything with probability 1 - lambda;
    MDC mixes the profile over the binomial received-description count
    (description losses are i.i.d. on one link at a given gain).
    """
    lam = per_packet_success
    if not 0.0 <= lam <= 1.0:
        raise ConfigurationError("success probability must lie in [0, 1]")
    if scheme.kind == "mdc":
        prof = scheme.profile(source_var)
        pmf = _binom_pmf(scheme.descriptions, lam)
        return sum(p * d for p, d in zip(pmf, prof.D))
    D = scheme.distortion(source_var)
    return lam * D + (1.0 - lam) * source_var
