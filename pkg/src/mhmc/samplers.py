"""MCMC kernels: standard, magnetic, and preconditioned HMC.

The magnetic kernel augments the chain state with a sign on the momentum
rotation generator.  Each proposal runs the splitting integrator under the
current sign, then flips momentum and sign together so the proposal map is
an involution; after the accept/reject decision both are flipped once more,
so the sign changes exactly on rejected steps.

Chains are vectorized over a leading axis: ``run_chains`` advances a whole
batch per numpy call while every chain consumes its own counter-based RNG
stream, so results are reproducible regardless of batch size or scheduling.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, NonFinite, NotSPD
from .integrators import run_leapfrog
from .skewflow import AntisymmetricMatrix, MagneticFlowCache, validate_antisymmetric
from .targets import TargetDensity


def chain_rng(seed: int, chain_index: int = 0) -> np.random.Generator:
    """Counter-based stream for one chain, derived from (seed, chain_index)."""
    seq = np.random.SeedSequence(entropy=seed, spawn_key=(chain_index,))
    return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class ChainState:
    """Augmented sampler state: position, momentum and generator sign."""

    theta: np.ndarray
    p: np.ndarray
    g_sign: int = +1

    def __post_init__(self):
        if self.g_sign not in (+1, -1):
            raise ValueError(f"g_sign must be +1 or -1, got {self.g_sign}")
        theta = np.asarray(self.theta, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if theta.shape != p.shape:
            raise DimensionMismatch(
                f"theta shape {theta.shape} != p shape {p.shape}"
            )
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "p", p)


@dataclass(frozen=True)
class SamplerConfig:
    epsilon: float
    n_leapfrog: int
    n_samples: int
    seed: int
    g_matrix: Optional[AntisymmetricMatrix] = None
    mass_matrix: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.n_leapfrog < 1:
            raise ValueError(f"n_leapfrog must be >= 1, got {self.n_leapfrog}")
        if self.n_samples < 0:
            raise ValueError(f"n_samples must be >= 0, got {self.n_samples}")


@dataclass(frozen=True)
class SampleRecord:
    iteration: int
    theta: np.ndarray
    accepted: bool
    energy_error: float
    g_sign_after: int


@dataclass
class ChainsResult:
    """Per-chain sample arrays from a batched run."""

    thetas: np.ndarray  # (n_chains, n_samples, dim)
    accepted: np.ndarray  # (n_chains, n_samples) bool
    energy_error: np.ndarray  # (n_chains, n_samples)
    g_sign: np.ndarray  # (n_chains, n_samples) int8
    final_states: list

    @property
    def n_chains(self) -> int:
        return self.thetas.shape[0]

    @property
    def mean_acceptance(self) -> float:
        return float(np.mean(self.accepted)) if self.accepted.size else float("nan")

    def chain_records(self, chain: int) -> list:
        return [
            SampleRecord(
                n,
                self.thetas[chain, n].copy(),
                bool(self.accepted[chain, n]),
                float(self.energy_error[chain, n]),
                int(self.g_sign[chain, n]),
            )
            for n in range(self.thetas.shape[1])
        ]


def _as_generator(g_matrix, dim) -> AntisymmetricMatrix:
    if g_matrix is None:
        return validate_antisymmetric(np.zeros((dim, dim)))
    if isinstance(g_matrix, AntisymmetricMatrix):
        return g_matrix
    return validate_antisymmetric(g_matrix)


class _Kernel:
    """Precomputed per-kind machinery shared by all chains in a batch."""

    def __init__(self, target: TargetDensity, cfg: SamplerConfig, kind: str):
        if kind not in ("hmc", "mhmc", "preconditioned"):
            raise ValueError(f"unknown sampler kind {kind!r}")
        self.target = target
        self.cfg = cfg
        self.kind = kind
        self.cache = None
        self.mass_chol = None
        self.mass_inv = None
        if kind == "mhmc":
            g = _as_generator(cfg.g_matrix, target.dim)
            if g.dim != target.dim:
                raise DimensionMismatch(
                    f"G is {g.dim}x{g.dim} but target dim is {target.dim}"
                )
            self.cache = MagneticFlowCache.build(g, cfg.epsilon)
        elif kind == "preconditioned":
            if cfg.mass_matrix is None:
                raise ValueError("preconditioned kind requires cfg.mass_matrix")
            mass = np.asarray(cfg.mass_matrix, dtype=float)
            if not np.allclose(mass, mass.T, atol=1e-12):
                raise NotSPD("mass matrix is not symmetric")
            try:
                self.mass_chol = np.linalg.cholesky(mass)
            except np.linalg.LinAlgError as exc:
                raise NotSPD("mass matrix is not positive definite") from exc
            self.mass_inv = np.linalg.inv(mass)

    def resample(self, rngs) -> np.ndarray:
        normals = np.stack([rng.standard_normal(self.target.dim) for rng in rngs])
        if self.mass_chol is not None:
            return normals @ self.mass_chol.T
        return normals

    def kinetic(self, p) -> np.ndarray:
        if self.mass_inv is not None:
            return 0.5 * np.sum(p * (p @ self.mass_inv), axis=-1)
        return 0.5 * np.sum(p * p, axis=-1)

    def propose(self, thetas, ps, signs):
        """L integrator steps per chain under each chain's own sign."""
        cfg = self.cfg
        if self.kind == "hmc":
            return run_leapfrog(
                self.target, thetas, ps, cfg.epsilon, cfg.n_leapfrog
            )
        if self.kind == "preconditioned":
            return self._propose_preconditioned(thetas, ps)
        if not np.any(self.cache.generator):
            # G == 0: both signs are the same Euler translation.
            return run_leapfrog(
                self.target, thetas, ps, cfg.epsilon, cfg.n_leapfrog, self.cache, +1
            )
        theta_out = np.empty_like(thetas)
        p_out = np.empty_like(ps)
        for sign in (+1, -1):
            mask = signs == sign
            if not np.any(mask):
                continue
            theta_out[mask], p_out[mask] = run_leapfrog(
                self.target,
                thetas[mask],
                ps[mask],
                cfg.epsilon,
                cfg.n_leapfrog,
                self.cache,
                sign,
            )
        return theta_out, p_out

    def _propose_preconditioned(self, thetas, ps):
        eps = self.cfg.epsilon
        half = 0.5 * eps
        grad = self.target.gradient(thetas)
        for _ in range(self.cfg.n_leapfrog):
            ps = ps - half * grad
            thetas = thetas + eps * (ps @ self.mass_inv)
            grad = self.target.gradient(thetas)
            ps = ps - half * grad
        return thetas, ps


def run_chains(
    target: TargetDensity,
    init_theta,
    cfg: SamplerConfig,
    kind: str = "hmc",
    n_chains: int = 1,
) -> ChainsResult:
    """Run n_chains independent chains, advanced together batchwise.

    ``init_theta`` is one shared (d,) start or per-chain (n_chains, d)
    starts.  Non-finite proposal energies count as rejections with
    energy_error = +inf.
    """
    kernel = _Kernel(target, cfg, kind)
    dim = target.dim
    init_theta = np.asarray(init_theta, dtype=float)
    if init_theta.shape == (dim,):
        thetas = np.tile(init_theta, (n_chains, 1))
    elif init_theta.shape == (n_chains, dim):
        thetas = init_theta.copy()
    else:
        raise DimensionMismatch(
            f"init_theta shape {init_theta.shape} incompatible with "
            f"{n_chains} chains of dim {dim}"
        )
    rngs = [chain_rng(cfg.seed, i) for i in range(n_chains)]
    signs = np.full(n_chains, +1, dtype=np.int64)

    n = cfg.n_samples
    out_thetas = np.empty((n_chains, n, dim))
    out_accept = np.empty((n_chains, n), dtype=bool)
    out_denergy = np.empty((n_chains, n))
    out_sign = np.empty((n_chains, n), dtype=np.int8)

    ps = np.zeros((n_chains, dim))
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        for it in range(n):
            ps = kernel.resample(rngs)
            h_old = target.potential(thetas) + kernel.kinetic(ps)
            if it == 0 and not np.all(np.isfinite(h_old)):
                bad = int(np.flatnonzero(~np.isfinite(h_old))[0])
                raise NonFinite(
                    f"initial state of chain {bad} has non-finite energy"
                )
            theta_new, p_new = kernel.propose(thetas, ps, signs)
            p_new = -p_new
            sign_new = -signs
            h_new = target.potential(theta_new) + kernel.kinetic(p_new)
            denergy = h_new - h_old
            uniforms = np.array([rng.random() for rng in rngs])
            finite = np.isfinite(denergy)
            accept = finite & (uniforms < np.exp(np.where(finite, -denergy, 0.0)))
            denergy = np.where(finite, denergy, np.inf)

            thetas = np.where(accept[:, None], theta_new, thetas)
            ps = np.where(accept[:, None], p_new, ps)
            signs = np.where(accept, sign_new, signs)
            # Final flip of momentum and sign; restores the sign on
            # acceptance and flips it on rejection.
            ps = -ps
            signs = -signs

            out_thetas[:, it] = thetas
            out_accept[:, it] = accept
            out_denergy[:, it] = denergy
            out_sign[:, it] = signs

    finals = [
        ChainState(thetas[i].copy(), ps[i].copy(), int(signs[i]))
        for i in range(n_chains)
    ]
    return ChainsResult(out_thetas, out_accept, out_denergy, out_sign, finals)


def run_chain(
    target: TargetDensity, init_theta, cfg: SamplerConfig, kind: str = "hmc"
) -> list:
    """Single-chain convenience wrapper; returns SampleRecords in order."""
    result = run_chains(target, init_theta, cfg, kind, n_chains=1)
    return result.chain_records(0)


def _single_step(target, state, cfg, rng, kind, iteration):
    kernel = _Kernel(target, cfg, kind)
    thetas = state.theta[None, :].copy()
    signs = np.array([state.g_sign], dtype=np.int64)
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        ps = kernel.resample([rng])
        h_old = target.potential(thetas) + kernel.kinetic(ps)
        theta_new, p_new = kernel.propose(thetas, ps, signs)
        p_new = -p_new
        sign_new = -signs
        h_new = target.potential(theta_new) + kernel.kinetic(p_new)
        denergy = float(h_new[0] - h_old[0])
        uniform = rng.random()
        if np.isfinite(denergy):
            accepted = bool(uniform < np.exp(-denergy))
        else:
            accepted = False
            denergy = float("inf")
    if accepted:
        theta, p, sign = theta_new[0], p_new[0], int(sign_new[0])
    else:
        theta, p, sign = thetas[0], ps[0], int(signs[0])
    new_state = ChainState(theta.copy(), -p, -sign)
    record = SampleRecord(iteration, theta.copy(), accepted, denergy, -sign)
    return new_state, record


def mhmc_step(
    target: TargetDensity,
    state: ChainState,
    cfg: SamplerConfig,
    rng: np.random.Generator,
    iteration: int = 0,
):
    """One magnetic HMC transition: resample, propose, flip, test, flip."""
    return _single_step(target, state, cfg, rng, "mhmc", iteration)


def hmc_step(
    target: TargetDensity,
    state: ChainState,
    cfg: SamplerConfig,
    rng: np.random.Generator,
    iteration: int = 0,
):
    """One standard HMC transition (the G = 0 path of the magnetic kernel)."""
    return _single_step(target, state, cfg, rng, "hmc", iteration)


def self_inverse_proposal(
    target: TargetDensity,
    cache: MagneticFlowCache,
    step: float,
    n_steps: int,
    theta,
    p,
    sign: int,
    f_matrix=None,
):
    """The deterministic proposal map T: L magnetic steps then flip (p, sign).

    T is an involution up to floating-point roundoff, which is what makes
    the accept/reject test valid.
    """
    theta_new, p_new = run_leapfrog(
        target, theta, p, step, n_steps, cache, sign, f_matrix
    )
    return theta_new, -p_new, -sign


def check_preconditioning_equivalence(
    target: TargetDensity, mass, init, cfg_steps
) -> float:
    """Dual-simulate preconditioned HMC against its non-canonical form.

    Route (a) runs the leapfrog with kinetic energy p^T M^{-1} p / 2 from
    (theta, p).  Route (b) transforms p' = L^{-1} p with M = L L^T, runs the
    canonical-G splitting with coupling F = L^{-T}, and maps back via
    p = L p'.  Returns the max deviation over the trajectory.
    """
    step, n_steps = cfg_steps.step, cfg_steps.n_steps
    mass = np.asarray(mass, dtype=float)
    if not np.allclose(mass, mass.T, atol=1e-12):
        raise NotSPD("mass matrix is not symmetric")
    try:
        chol = np.linalg.cholesky(mass)
    except np.linalg.LinAlgError as exc:
        raise NotSPD("mass matrix is not positive definite") from exc
    mass_inv = np.linalg.inv(mass)
    f_matrix = np.linalg.inv(chol).T

    theta_a = np.asarray(init.theta, dtype=float).copy()
    p_a = np.asarray(init.p, dtype=float).copy()
    theta_b = theta_a.copy()
    p_b = np.linalg.solve(chol, p_a)

    half = 0.5 * step
    deviation = 0.0
    for _ in range(n_steps):
        grad = target.gradient(theta_a)
        p_a = p_a - half * grad
        theta_a = theta_a + step * (mass_inv @ p_a)
        p_a = p_a - half * target.gradient(theta_a)

        grad_b = target.gradient(theta_b)
        p_b = p_b - half * (grad_b @ f_matrix)
        theta_b = theta_b + step * (p_b @ f_matrix.T)
        p_b = p_b - half * (target.gradient(theta_b) @ f_matrix)

        deviation = max(
            deviation,
            float(np.max(np.abs(theta_a - theta_b))),
            float(np.max(np.abs(p_a - chol @ p_b))),
        )
    return deviation


def check_change_of_basis_equivalence(
    target: TargetDensity, f_matrix, init, cfg_steps
) -> float:
    """Dual-simulate HMC in transformed coordinates against non-canonical F.

    Route (a) runs canonical HMC on theta' = F^{-1} theta with potential
    U(F theta') and maps back through F.  Route (b) runs the splitting
    integrator with off-diagonal coupling F on the original coordinates.
    """
    step, n_steps = cfg_steps.step, cfg_steps.n_steps
    f_matrix = np.asarray(f_matrix, dtype=float)
    theta_b = np.asarray(init.theta, dtype=float).copy()
    p_b = np.asarray(init.p, dtype=float).copy()
    theta_a = np.linalg.solve(f_matrix, theta_b)
    p_a = p_b.copy()

    half = 0.5 * step
    deviation = 0.0
    for _ in range(n_steps):
        grad_a = f_matrix.T @ target.gradient(f_matrix @ theta_a)
        p_a = p_a - half * grad_a
        theta_a = theta_a + step * p_a
        p_a = p_a - half * (f_matrix.T @ target.gradient(f_matrix @ theta_a))

        grad_b = target.gradient(theta_b)
        p_b = p_b - half * (grad_b @ f_matrix)
        theta_b = theta_b + step * (p_b @ f_matrix.T)
        p_b = p_b - half * (target.gradient(theta_b) @ f_matrix)

        deviation = max(
            deviation,
            float(np.max(np.abs(f_matrix @ theta_a - theta_b))),
            float(np.max(np.abs(p_a - p_b))),
        )
    return deviation
