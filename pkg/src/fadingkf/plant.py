"""Linear plant, sensor measurements and stationary statistics.

The plant is the LTI system x(k+1) = A x(k) + w(k) with Gaussian driving
noise, observed by scalar sensors y_m(k) = C_m x(k) + v_m(k).  The
stationary covariance of x feeds the quantizer scaling and the bound
constants.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import ConfigurationError


def _as_matrix(M, name: str) -> np.ndarray:
    A = np.asarray(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ConfigurationError(f"{name} must be a square matrix, got shape {A.shape}")
    return A


def _check_psd(M: np.ndarray, name: str, tol: float = 1e-9) -> None:
    if not np.allclose(M, M.T, atol=tol):
        raise ConfigurationError(f"{name} must be symmetric")
    w = np.linalg.eigvalsh(0.5 * (M + M.T))
    if w.min() < -tol * max(1.0, abs(w.max())):
        raise ConfigurationError(f"{name} must be positive semidefinite (min eig {w.min():g})")


@dataclass(frozen=True)
class SensorSpec:
    """One scalar sensor: observation row, noise variance, admissible bit-rates."""

    C: np.ndarray
    R: float
    rate_set: tuple[float, ...]

    def __post_init__(self):
        C = np.atleast_1d(np.asarray(self.C, dtype=float)).ravel()
        object.__setattr__(self, "C", C)
        if not np.any(C != 0.0):
            raise ConfigurationError("sensor observation row must have a nonzero entry")
        if self.R < 0:
            raise ConfigurationError("measurement-noise variance must be >= 0")
        rates = tuple(sorted(float(b) for b in self.rate_set))
        if not rates:
            raise ConfigurationError("rate_set must be non-empty")
        if rates[0] <= 0:
            raise ConfigurationError("rates must be positive")
        object.__setattr__(self, "rate_set", rates)


@dataclass(frozen=True)
class PlantModel:
    """LTI system matrices plus the ordered sensor list."""

    A: np.ndarray
    Q: np.ndarray
    P0: np.ndarray
    sensors: tuple[SensorSpec, ...]

    def __post_init__(self):
        A = _as_matrix(self.A, "A")
        Q = _as_matrix(self.Q, "Q")
        P0 = _as_matrix(self.P0, "P0")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "P0", P0)
        n = A.shape[0]
        if Q.shape != (n, n) or P0.shape != (n, n):
            raise ConfigurationError("A, Q, P0 must share the same dimension")
        _check_psd(Q, "Q")
        _check_psd(P0, "P0")
        sensors = tuple(self.sensors)
        if not sensors:
            raise ConfigurationError("at least one sensor is required")
        for m, s in enumerate(sensors):
            if s.C.shape != (n,):
                raise ConfigurationError(f"sensor {m}: C has shape {s.C.shape}, expected ({n},)")
        object.__setattr__(self, "sensors", sensors)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def n_sensors(self) -> int:
        return len(self.sensors)

    def C_matrix(self) -> np.ndarray:
        """All observation rows stacked, shape (M, n)."""
        return np.vstack([s.C for s in self.sensors])


@dataclass
class PlantState:
    x: np.ndarray
    k: int = 0

    def __post_init__(self):
        self.x = np.atleast_1d(np.asarray(self.x, dtype=float)).ravel()
        if not np.all(np.isfinite(self.x)):
            raise ConfigurationError("plant state must be finite")


def gaussian_factor(cov: np.ndarray) -> np.ndarray:
    """Square-root factor L with L L^T = cov, valid for singular PSD matrices."""
    w, V = np.linalg.eigh(0.5 * (cov + cov.T))
    return V * np.sqrt(np.clip(w, 0.0, None))


def gaussian_sample(rng: np.random.Generator, cov: np.ndarray, size=None) -> np.ndarray:
    """Zero-mean Gaussian draws with the given covariance (PSD, may be singular)."""
    L = gaussian_factor(np.asarray(cov, dtype=float))
    n = L.shape[0]
    z = rng.standard_normal(n if size is None else (size, n))
    return z @ L.T


def step_plant(state: PlantState, model: PlantModel, rng: np.random.Generator) -> PlantState:
    """Advance the plant one step: x' = A x + w, w ~ N(0, Q)."""
    if state.x.shape != (model.n,):
        raise ConfigurationError(
            f"state dimension {state.x.shape} does not match plant dimension {model.n}"
        )
    w = gaussian_sample(rng, model.Q)
    return PlantState(x=model.A @ state.x + w, k=state.k + 1)


def measure(state: PlantState, m: int, model: PlantModel, rng: np.random.Generator) -> float:
    """Sample sensor m: y = C_m x + v, v ~ N(0, R_m)."""
    if not 0 <= m < model.n_sensors:
        raise ConfigurationError(f"sensor index {m} out of range 0..{model.n_sensors - 1}")
    s = model.sensors[m]
    v = rng.standard_normal() * np.sqrt(s.R) if s.R > 0 else 0.0
    return float(s.C @ state.x + v)


def stationary_covariance(model: PlantModel) -> np.ndarray:
    """Solve S = A S A^T + Q for the stationary state covariance.

    Requires the spectral radius of A to be strictly below one; unstable
    plants have no stationary distribution and the caller must supply
    source variances explicitly.
    """
    rho = max(abs(np.linalg.eigvals(model.A)))
    if rho >= 1.0:
        raise ConfigurationError(
            f"no stationary distribution: spectral radius {rho:.6f} >= 1; "
            "provide source variances explicitly"
        )
    S = linalg.solve_discrete_lyapunov(model.A, model.Q)
    return 0.5 * (S + S.T)


def source_variances(model: PlantModel) -> np.ndarray:
    """Stationary measurement variances C_m S C_m^T + R_m, one per sensor."""
    S = stationary_covariance(model)
    return np.array([float(s.C @ S @ s.C) + s.R for s in model.sensors])
