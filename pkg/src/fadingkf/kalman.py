"""Time-varying Kalman filter over the stacked intermittent measurement model.

Lost sensors contribute zero rows to the stacked output matrix; the gain
is computed on the active rows only, so those measurements never touch
the estimate.  The equivalent measurement noise adds the quantization
distortion of the realized reconstruction to the sensor noise.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import ConfigurationError, NumericalError
from .plant import PlantModel


def _symmetrize(P: np.ndarray) -> np.ndarray:
    return 0.5 * (P + P.T)


@dataclass
class FilterState:
    """Estimate and covariances around one measurement update."""

    x_hat: np.ndarray
    x_pred: np.ndarray
    P_prior: np.ndarray
    P_post: np.ndarray

    @classmethod
    def initial(cls, model: PlantModel) -> "FilterState":
        n = model.n
        z = np.zeros(n)
        P0 = model.P0.copy()
        return cls(x_hat=z.copy(), x_pred=z.copy(), P_prior=P0, P_post=P0.copy())


@dataclass(frozen=True)
class StackedMeasurement:
    """Stacked rows theta_m C_m, entries theta_m yhat_m, noise R_m + D_m."""

    C: np.ndarray
    y: np.ndarray
    R: np.ndarray  # diagonal entries, one per sensor

    def __post_init__(self):
        for m in range(self.C.shape[0]):
            row_zero = not np.any(self.C[m] != 0.0)
            if row_zero and self.y[m] != 0.0:
                raise ConfigurationError("zero rows must pair with zero measurement entries")

    @property
    def active(self) -> np.ndarray:
        return np.any(self.C != 0.0, axis=1)


def stack_measurement(flags, y_hat, schemes, distortions, model: PlantModel) -> StackedMeasurement:
    """Build the stacked measurement for one slot.

    `distortions` holds the modeled quantization distortion D_m of the
    realized reconstruction (profile value at the received count for
    MDC); entries for lost sensors are irrelevant since their rows are
    zeroed.
    """
    M = model.n_sensors
    if len(flags.theta) != M:
        raise ConfigurationError("flag/sensor count mismatch")
    C = np.zeros((M, model.n))
    y = np.zeros(M)
    R = np.zeros(M)
    for m in range(M):
        R[m] = model.sensors[m].R + distortions[m]
        if flags.theta[m]:
            C[m] = model.sensors[m].C
            y[m] = y_hat[m]
    return StackedMeasurement(C=C, y=y, R=R)


def posterior_covariance(P_prior: np.ndarray, C: np.ndarray, R_diag: np.ndarray,
                         joseph: bool = False):
    """Measurement-updated covariance (and gain) using active rows only."""
    active = np.any(C != 0.0, axis=1)
    n = P_prior.shape[0]
    if not np.any(active):
        return P_prior.copy(), np.zeros((n, len(R_diag)))
    Ca = C[active]
    Ra = R_diag[active]
    S = Ca @ P_prior @ Ca.T + np.diag(Ra)
    try:
        cf = linalg.cho_factor(S)
        Kt = linalg.cho_solve(cf, Ca @ P_prior)  # solves S X = Ca P
    except linalg.LinAlgError as exc:
        raise NumericalError(
            f"singular innovation covariance on active rows (diag {np.diag(S)})"
        ) from exc
    Ka = Kt.T  # n x (active count)
    I_KC = np.eye(n) - Ka @ Ca
    if joseph:
        P_post = I_KC @ P_prior @ I_KC.T + Ka @ np.diag(Ra) @ Ka.T
    else:
        P_post = I_KC @ P_prior
    K = np.zeros((n, len(R_diag)))
    K[:, active] = Ka
    return _symmetrize(P_post), K


def kf_update(fs: FilterState, meas: StackedMeasurement, model: PlantModel,
              joseph: bool = False) -> FilterState:
    """One filter cycle: measurement update at k, then prediction to k+1."""
    P_post, K = posterior_covariance(fs.P_prior, meas.C, meas.R, joseph=joseph)
    innovation = meas.y - meas.C @ fs.x_pred
    x_hat = fs.x_pred + K @ innovation
    x_pred = model.A @ x_hat
    P_prior = _symmetrize(model.A @ P_post @ model.A.T + model.Q)
    return FilterState(x_hat=x_hat, x_pred=x_pred, P_prior=P_prior, P_post=P_post)
