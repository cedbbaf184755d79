"""FitzHugh-Nagumo neuron model and the Bayesian parameter posterior.

The two-state system

    dV/dt = c (V - V^3/3 + R)
    dR/dt = -(V - a + b R) / c

is solved with fixed-step RK4, augmented with the six forward-sensitivity
states d(V, R)/d(a, b, c) obtained by differentiating the vector field.
Initial sensitivities are zero because the initial conditions do not depend
on the parameters.  Every posterior potential/gradient query costs one
augmented solve; the solver is JIT-compiled since it dominates sampling time.
"""

import csv
from collections import OrderedDict
from dataclasses import dataclass

import numba
import numpy as np

from .errors import NonFinite
from .targets import TargetDensity

# State layout: V, R, dV/da, dR/da, dV/db, dR/db, dV/dc, dR/dc.
_N_STATE = 8
_DIVERGENCE_LIMIT = 1e8


@numba.njit(cache=True)
def _augmented_field(y, a, b, c):
    v, r = y[0], y[1]
    out = np.empty(_N_STATE)
    drive = v - v * v * v / 3.0 + r
    out[0] = c * drive
    out[1] = -(v - a + b * r) / c

    # State Jacobian of (dV/dt, dR/dt).
    j11 = c * (1.0 - v * v)
    j12 = c
    j21 = -1.0 / c
    j22 = -b / c
    # Parameter partials of the vector field.
    pa_v, pa_r = 0.0, 1.0 / c
    pb_v, pb_r = 0.0, -r / c
    pc_v, pc_r = drive, (v - a + b * r) / (c * c)

    out[2] = j11 * y[2] + j12 * y[3] + pa_v
    out[3] = j21 * y[2] + j22 * y[3] + pa_r
    out[4] = j11 * y[4] + j12 * y[5] + pb_v
    out[5] = j21 * y[4] + j22 * y[5] + pb_r
    out[6] = j11 * y[6] + j12 * y[7] + pc_v
    out[7] = j21 * y[6] + j22 * y[7] + pc_r
    return out


@numba.njit(cache=True)
def _solve_augmented(a, b, c, init_v, init_r, times, dt):
    """RK4 over the augmented system; returns (states, diverged flag).

    Each interval between requested times is split into equal sub-steps of
    width <= dt so the solution lands exactly on the observation times.
    """
    n = times.shape[0]
    out = np.empty((n, _N_STATE))
    y = np.zeros(_N_STATE)
    y[0] = init_v
    y[1] = init_r
    t_prev = 0.0
    for i in range(n):
        span = times[i] - t_prev
        if span > 0.0:
            n_sub = int(np.ceil(span / dt - 1e-12))
            if n_sub < 1:
                n_sub = 1
            h = span / n_sub
            for _ in range(n_sub):
                k1 = _augmented_field(y, a, b, c)
                k2 = _augmented_field(y + 0.5 * h * k1, a, b, c)
                k3 = _augmented_field(y + 0.5 * h * k2, a, b, c)
                k4 = _augmented_field(y + h * k3, a, b, c)
                y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if np.abs(y[0]) > _DIVERGENCE_LIMIT or np.abs(y[1]) > _DIVERGENCE_LIMIT:
                return out, True
        out[i] = y
        t_prev = times[i]
    return out, False


def fhn_solve(a, b, c, init_v, init_r, times, dt=0.01):
    """Solve the model and its parameter sensitivities at the given times.

    Args:
        a, b, c: Model parameters.
        init_v, init_r: Known initial conditions at t = 0.
        times: Strictly increasing, nonnegative observation times.
        dt: Upper bound on the RK4 sub-step width.

    Returns:
        (trajectory, sensitivities): arrays of shape (N, 2) and (N, 2, 3),
        where sensitivities[n, i, k] is d(state_i at t_n) / d(param_k).

    Raises:
        NonFinite: If the state diverges during integration.
    """
    times = np.asarray(times, dtype=float)
    if not (np.isfinite(a) and np.isfinite(b) and np.isfinite(c)) or c == 0.0:
        raise NonFinite(f"invalid parameters ({a}, {b}, {c}); c must be nonzero")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if times.size == 0:
        raise ValueError("times must be nonempty")
    if times[0] < 0 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be nonnegative and strictly increasing")
    states, diverged = _solve_augmented(
        float(a), float(b), float(c), float(init_v), float(init_r), times, float(dt)
    )
    if diverged or not np.all(np.isfinite(states)):
        raise NonFinite(f"trajectory diverged for parameters ({a}, {b}, {c})")
    trajectory = states[:, :2].copy()
    sensitivities = states[:, 2:].reshape(-1, 3, 2).transpose(0, 2, 1).copy()
    return trajectory, sensitivities


@dataclass(frozen=True)
class FhnObservationSet:
    """Noisy observations of (V, R) at known times with known initial state."""

    times: np.ndarray
    obs_v: np.ndarray
    obs_r: np.ndarray
    noise_sd: float
    initial_v: float
    initial_r: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        obs_v = np.asarray(self.obs_v, dtype=float)
        obs_r = np.asarray(self.obs_r, dtype=float)
        if not (times.shape == obs_v.shape == obs_r.shape) or times.ndim != 1:
            raise ValueError("times, obs_v, obs_r must be 1-D of equal length")
        if times.size and (times[0] < 0 or np.any(np.diff(times) <= 0)):
            raise ValueError("times must be nonnegative and strictly increasing")
        if self.noise_sd <= 0:
            raise ValueError(f"noise_sd must be positive, got {self.noise_sd}")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "obs_v", obs_v)
        object.__setattr__(self, "obs_r", obs_r)

    def to_csv(self, path):
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["t", "v", "r"])
            for t, v, r in zip(self.times, self.obs_v, self.obs_r):
                writer.writerow([repr(float(t)), repr(float(v)), repr(float(r))])

    @classmethod
    def from_csv(cls, path, noise_sd, initial_v, initial_r):
        with open(path, newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header != ["t", "v", "r"]:
                raise ValueError(f"expected header t,v,r in {path}, got {header}")
            rows = [[float(cell) for cell in row] for row in reader if row]
        if not rows:
            raise ValueError(f"no observations in {path}")
        data = np.array(rows)
        return cls(data[:, 0], data[:, 1], data[:, 2], noise_sd, initial_v, initial_r)


def synthesize_observations(
    a,
    b,
    c,
    n_obs,
    t_max,
    noise_sd,
    seed,
    initial_v=-1.0,
    initial_r=1.0,
    dt=0.01,
) -> FhnObservationSet:
    """Generate evenly spaced noisy observations from a true parameter set."""
    times = np.linspace(0.0, t_max, n_obs)
    trajectory, _ = fhn_solve(a, b, c, initial_v, initial_r, times, dt)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    noisy = trajectory + noise_sd * rng.standard_normal(trajectory.shape)
    return FhnObservationSet(
        times, noisy[:, 0], noisy[:, 1], noise_sd, initial_v, initial_r
    )


def fhn_posterior(obs: FhnObservationSet, dt=0.01, name: str = "fhn") -> TargetDensity:
    """Posterior over (a, b, c): standard normal priors, Gaussian likelihood.

    U(a,b,c) = (a^2+b^2+c^2)/2
             + sum_n [(V~_n - V_n)^2 + (R~_n - R_n)^2] / (2 noise_sd^2),

    with the gradient assembled from the forward sensitivities.  A small memo
    on the augmented solve lets potential and gradient calls at the same
    point share one integration.
    """
    inv_var = 1.0 / obs.noise_sd**2
    memo: OrderedDict = OrderedDict()

    def _solve(params):
        key = (float(params[0]), float(params[1]), float(params[2]))
        hit = memo.get(key)
        if hit is None:
            hit = fhn_solve(
                key[0], key[1], key[2], obs.initial_v, obs.initial_r, obs.times, dt
            )
            memo[key] = hit
            while len(memo) > 16:
                memo.popitem(last=False)
        return hit

    def _contained(fn, rows, shape):
        # Batched sampler path: a diverged row must not kill its batch, so
        # it becomes NaN and the accept/reject step treats it as rejection.
        out = np.full(shape, np.nan)
        for i, row in enumerate(rows):
            try:
                out[i] = fn(row)
            except NonFinite:
                pass
        return out

    def potential(theta):
        theta = np.asarray(theta, dtype=float)
        if theta.ndim > 1:
            return _contained(potential, theta, theta.shape[0])
        if obs.times.size == 0:
            return 0.5 * theta @ theta
        trajectory, _ = _solve(theta)
        res_v = obs.obs_v - trajectory[:, 0]
        res_r = obs.obs_r - trajectory[:, 1]
        return (
            0.5 * theta @ theta
            + 0.5 * inv_var * (res_v @ res_v + res_r @ res_r)
        )

    def gradient(theta):
        theta = np.asarray(theta, dtype=float)
        if theta.ndim > 1:
            return _contained(gradient, theta, theta.shape)
        if obs.times.size == 0:
            return theta.copy()
        trajectory, sens = _solve(theta)
        res_v = obs.obs_v - trajectory[:, 0]
        res_r = obs.obs_r - trajectory[:, 1]
        data_term = res_v @ sens[:, 0, :] + res_r @ sens[:, 1, :]
        return theta - inv_var * data_term

    return TargetDensity(3, name, potential, gradient)
