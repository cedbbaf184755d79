"""Symplectic splitting integrators for canonical and magnetic dynamics.

One step composes three exactly integrated sub-flows: a half kick of the
momentum by the potential gradient, the exact momentum-rotation drift (an
Euler translation when G = 0), and a second half kick.  The same raw-array
core drives the single-state operations here and the batched chain runners
in :mod:`mhmc.samplers`; arrays of shape (d,) or (batch, d) are accepted
throughout.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, NonFinite, SingularA
from .skewflow import MagneticFlowCache, momentum_flow
from .targets import TargetDensity


@dataclass(frozen=True)
class PhasePoint:
    """Position/momentum pair with finite entries."""

    theta: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if theta.shape != p.shape:
            raise DimensionMismatch(
                f"theta shape {theta.shape} != p shape {p.shape}"
            )
        if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(p))):
            raise NonFinite("phase point has non-finite entries")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "p", p)


@dataclass(frozen=True)
class IntegratorConfig:
    """Step size, step count and the optional magnetic flow operators.

    ``flow_cache`` None means canonical dynamics (G = 0).  ``f_matrix`` is
    the invertible coupling applied as F in the drift and F^T in the kick;
    None means identity and skips the products entirely.
    """

    step: float
    n_steps: int
    flow_cache: Optional[MagneticFlowCache] = None
    f_matrix: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError(f"step must be positive, got {self.step}")
        if self.n_steps < 0:
            raise ValueError(f"n_steps must be nonnegative, got {self.n_steps}")
        if self.flow_cache is not None and self.flow_cache.step != self.step:
            raise ValueError(
                f"flow cache step {self.flow_cache.step} != config step {self.step}"
            )


def _kick(p, grad, half_step, f_matrix):
    if f_matrix is None:
        return p - half_step * grad
    # (F^T grad)_i = sum_j F_ji grad_j == grad @ F for batched rows.
    return p - half_step * (grad @ f_matrix)


def _drift(theta, p, step, cache, sign, f_matrix):
    if cache is None:
        if f_matrix is None:
            return theta + step * p, p
        return theta + step * (p @ f_matrix.T), p
    return momentum_flow(cache, sign, theta, p, f_matrix)


def run_leapfrog(
    target: TargetDensity,
    theta,
    p,
    step: float,
    n_steps: int,
    cache: Optional[MagneticFlowCache] = None,
    sign: int = +1,
    f_matrix=None,
    record=None,
):
    """Apply n_steps splitting steps to raw arrays; returns (theta, p).

    Consecutive half kicks share one gradient evaluation per position.  When
    ``record`` is a list, (theta, p) copies are appended at the start and
    after every step (n_steps + 1 entries).
    """
    theta = np.asarray(theta, dtype=float)
    p = np.asarray(p, dtype=float)
    if record is not None:
        record.append((theta.copy(), p.copy()))
    if n_steps == 0:
        return theta, p
    half = 0.5 * step
    grad = target.gradient(theta)
    for _ in range(n_steps):
        p = _kick(p, grad, half, f_matrix)
        theta, p = _drift(theta, p, step, cache, sign, f_matrix)
        grad = target.gradient(theta)
        p = _kick(p, grad, half, f_matrix)
        if record is not None:
            record.append((theta.copy(), p.copy()))
    return theta, p


def leapfrog_step(target: TargetDensity, s: PhasePoint, step: float) -> PhasePoint:
    """One canonical Stormer-Verlet step.

    Raises:
        NonFinite: If the new state is not finite.
    """
    theta, p = run_leapfrog(target, s.theta, s.p, step, 1)
    return PhasePoint(theta, p)


def magnetic_leapfrog_step(
    target: TargetDensity, s: PhasePoint, cfg: IntegratorConfig, g_sign: int
) -> PhasePoint:
    """One splitting step under the sign-selected magnetic drift."""
    if cfg.flow_cache is None:
        raise ValueError("magnetic step requires cfg.flow_cache")
    theta, p = run_leapfrog(
        target, s.theta, s.p, cfg.step, 1, cfg.flow_cache, g_sign, cfg.f_matrix
    )
    return PhasePoint(theta, p)


def trajectory(
    target: TargetDensity,
    s: PhasePoint,
    cfg: IntegratorConfig,
    g_sign: int = +1,
    record=None,
) -> PhasePoint:
    """Apply cfg.n_steps splitting steps (canonical when flow_cache is None)."""
    theta, p = run_leapfrog(
        target,
        s.theta,
        s.p,
        cfg.step,
        cfg.n_steps,
        cfg.flow_cache,
        g_sign,
        cfg.f_matrix,
        record,
    )
    return PhasePoint(theta, p)


def hamiltonian(target: TargetDensity, theta, p):
    """Total energy U(theta) + p.p/2, batched over leading axes."""
    p = np.asarray(p, dtype=float)
    return target.potential(theta) + 0.5 * np.sum(p * p, axis=-1)


def structure_matrix(dim: int, f_matrix=None, g_matrix=None) -> np.ndarray:
    """Assemble A = [[0, F], [-F^T, G]] for the 2*dim phase space."""
    a = np.zeros((2 * dim, 2 * dim))
    f = np.eye(dim) if f_matrix is None else np.asarray(f_matrix, dtype=float)
    a[:dim, dim:] = f
    a[dim:, :dim] = -f.T
    if g_matrix is not None:
        a[dim:, dim:] = np.asarray(g_matrix, dtype=float)
    return a


def flow_jacobian(target, s: PhasePoint, cfg: IntegratorConfig, g_sign, fd_step):
    """Central-difference Jacobian of the n-step flow at a phase point."""
    dim = s.theta.size
    jac = np.empty((2 * dim, 2 * dim))
    base = np.concatenate([s.theta, s.p])
    for i in range(2 * dim):
        bump = np.zeros(2 * dim)
        bump[i] = fd_step
        hi = base + bump
        lo = base - bump
        theta_hi, p_hi = run_leapfrog(
            target, hi[:dim], hi[dim:], cfg.step, cfg.n_steps,
            cfg.flow_cache, g_sign, cfg.f_matrix,
        )
        theta_lo, p_lo = run_leapfrog(
            target, lo[:dim], lo[dim:], cfg.step, cfg.n_steps,
            cfg.flow_cache, g_sign, cfg.f_matrix,
        )
        jac[:, i] = (
            np.concatenate([theta_hi, p_hi]) - np.concatenate([theta_lo, p_lo])
        ) / (2.0 * fd_step)
    return jac


def check_symplectic(
    target: TargetDensity,
    s: PhasePoint,
    cfg: IntegratorConfig,
    g_sign: int = +1,
    fd_step: float = 1e-6,
):
    """Verify J^T A^{-1} J = A^{-1} for the finite-difference flow Jacobian.

    Returns:
        (residual, det_deviation): max-norm of J^T A^{-1} J - A^{-1} and
        ``abs(det J) - 1``.

    Raises:
        SingularA: If the structure matrix is not invertible.
    """
    dim = s.theta.size
    g_signed = None
    if cfg.flow_cache is not None:
        g_signed = g_sign * cfg.flow_cache.generator
    a = structure_matrix(dim, cfg.f_matrix, g_signed)
    try:
        a_inv = np.linalg.inv(a)
    except np.linalg.LinAlgError as exc:
        raise SingularA("structure matrix is singular") from exc
    if not np.all(np.isfinite(a_inv)) or np.linalg.cond(a) > 1e12:
        raise SingularA("structure matrix is numerically singular")
    jac = flow_jacobian(target, s, cfg, g_sign, fd_step)
    residual = np.max(np.abs(jac.T @ a_inv @ jac - a_inv))
    det_deviation = abs(abs(np.linalg.det(jac)) - 1.0)
    return residual, det_deviation


def field_generator_3d(b) -> np.ndarray:
    """Antisymmetric generator of a 3D field vector b, [b]_x layout."""
    b1, b2, b3 = np.asarray(b, dtype=float)
    return np.array([[0.0, -b3, b2], [b3, 0.0, -b1], [-b2, b1, 0.0]])


def check_magnetic_equivalence(
    target: TargetDensity, b, s: PhasePoint, total_time: float, rk4_step: float = 1e-4
) -> float:
    """Compare the 3D non-canonical flow against the Newtonian field form.

    Integrates (i) d(theta)/dt = p, dp/dt = -grad U + G p with G built from
    the field vector b, and (ii) the second-order Newton equation with force
    -grad U + b x velocity computed via the cross product, both with RK4 at
    ``rk4_step``.  Returns the max deviation between the two trajectories.
    """
    if s.theta.size != 3:
        raise DimensionMismatch("3D check requires a 3-dimensional target")
    g = field_generator_3d(b)
    b = np.asarray(b, dtype=float)
    grad = target.gradient

    def field_matrix_form(z, out):
        out[:3] = z[3:]
        out[3:] = g @ z[3:]
        out[3:] -= grad(z[:3])
        return out

    def field_newton_form(z, out):
        out[:3] = z[3:]
        out[3:] = np.cross(b, z[3:])
        out[3:] -= grad(z[:3])
        return out

    n_steps = max(1, int(round(total_time / rk4_step)))
    h = total_time / n_steps
    z1 = np.concatenate([s.theta, s.p])
    z2 = z1.copy()
    stages = np.empty((4, 6))
    deviation = 0.0
    for _ in range(n_steps):
        for z, fld in ((z1, field_matrix_form), (z2, field_newton_form)):
            k1 = fld(z, stages[0])
            k2 = fld(z + 0.5 * h * k1, stages[1])
            k3 = fld(z + 0.5 * h * k2, stages[2])
            k4 = fld(z + h * k3, stages[3])
            z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        deviation = max(deviation, float(np.max(np.abs(z1 - z2))))
    return deviation
