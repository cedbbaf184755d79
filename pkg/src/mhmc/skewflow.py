"""Linear algebra for antisymmetric matrices.

Provides validation, a real orthogonal block decomposition (2x2 rotation
generators plus a null space), and the exact solution of the linear drift
system

    d(theta)/dt = F p,    dp/dt = G p

over a fixed time step, which is the momentum-rotation sub-flow used by the
magnetic leapfrog integrator.  The integrated flow operator

    Psi(G eps) = integral_0^eps exp(G s) ds

is used instead of G^{-1} (exp(G eps) - I) so that singular G needs no
special casing at call sites.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NotAntisymmetric, NumericalFailure

# Rotation rates below this threshold are treated as null-space directions;
# avoids catastrophic cancellation in (1 - cos(rate*eps)) / rate.
RANK_TOL = 1e-10

# Acceptable reconstruction residual for a block decomposition.
DECOMP_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class AntisymmetricMatrix:
    """A validated d x d real antisymmetric matrix."""

    dim: int
    entries: np.ndarray

    def scaled(self, factor: float) -> "AntisymmetricMatrix":
        return AntisymmetricMatrix(self.dim, factor * self.entries)


def validate_antisymmetric(m, tol: float = 1e-12) -> AntisymmetricMatrix:
    """Wrap ``m`` as an AntisymmetricMatrix, checking m[i,j] == -m[j,i].

    Args:
        m: Square matrix-like.
        tol: Largest allowed |m[i,j] + m[j,i]|.

    Raises:
        NotAntisymmetric: If the check fails; the message reports the worst
            offending index pair.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotAntisymmetric(f"expected a square matrix, got shape {m.shape}")
    sym = m + m.T
    worst = np.unravel_index(np.argmax(np.abs(sym)), sym.shape)
    if abs(sym[worst]) > tol:
        i, j = worst
        raise NotAntisymmetric(
            f"m[{i},{j}] + m[{j},{i}] = {sym[worst]:.3e} exceeds tolerance {tol:.1e}"
        )
    return AntisymmetricMatrix(m.shape[0], m.copy())


@dataclass(frozen=True)
class SkewBlockDecomposition:
    """Real canonical form of an antisymmetric matrix.

    ``basis`` is orthogonal with ``basis.T @ G @ basis`` equal to
    block-diag([[0, -r], [r, 0]] for r in rotation_rates) followed by a
    ``null_dim`` x ``null_dim`` zero block.  Rates are positive, sorted
    descending.
    """

    rotation_rates: np.ndarray
    basis: np.ndarray
    null_dim: int

    @property
    def dim(self) -> int:
        return self.basis.shape[0]


def block_decompose(g: AntisymmetricMatrix) -> SkewBlockDecomposition:
    """Compute the real orthogonal block form of an antisymmetric matrix.

    Uses the real Schur factorization, which for an antisymmetric (hence
    normal) matrix is quasi-diagonal, then orients and sorts the 2x2 blocks.

    Raises:
        NumericalFailure: If the reconstruction residual exceeds 1e-8.
    """
    m = g.entries
    d = g.dim
    if not np.any(m):
        return SkewBlockDecomposition(np.empty(0), np.eye(d), d)

    t, z = scipy.linalg.schur(m, output="real")

    pairs = []  # (rate, 2 basis columns)
    null_cols = []
    i = 0
    while i < d:
        if i + 1 < d and abs(t[i + 1, i]) > RANK_TOL:
            rate = 0.5 * (abs(t[i + 1, i]) + abs(t[i, i + 1]))
            cols = z[:, [i, i + 1]]
            if t[i + 1, i] < 0:
                # Swap the pair so the block reads [[0, -rate], [rate, 0]].
                cols = cols[:, ::-1]
            pairs.append((rate, cols))
            i += 2
        else:
            null_cols.append(z[:, i])
            i += 1

    pairs.sort(key=lambda item: -item[0])
    columns = [cols for _, cols in pairs] + (
        [np.stack(null_cols, axis=1)] if null_cols else []
    )
    basis = np.concatenate(columns, axis=1)
    rates = np.array([rate for rate, _ in pairs])
    dec = SkewBlockDecomposition(rates, basis, len(null_cols))

    residual = np.max(np.abs(basis.T @ m @ basis - _block_matrix(dec, m.dtype)))
    if residual > DECOMP_RESIDUAL_TOL:
        raise NumericalFailure(
            f"block decomposition residual {residual:.3e} exceeds "
            f"{DECOMP_RESIDUAL_TOL:.1e}"
        )
    return dec


def _block_matrix(dec: SkewBlockDecomposition, dtype) -> np.ndarray:
    """Assemble the canonical block-diagonal matrix of a decomposition."""
    d = dec.dim
    b = np.zeros((d, d), dtype=dtype)
    for k, rate in enumerate(dec.rotation_rates):
        i = 2 * k
        b[i, i + 1] = -rate
        b[i + 1, i] = rate
    return b


@dataclass(frozen=True)
class MagneticFlowCache:
    """Precomputed exp(+-G eps) and Psi(+-G eps) for a fixed step.

    Both signs are cached so the sign-flip augmentation of the sampler costs
    a single upfront decomposition.
    """

    step: float
    generator: np.ndarray
    exp_pos: np.ndarray
    exp_neg: np.ndarray
    psi_pos: np.ndarray
    psi_neg: np.ndarray

    @property
    def dim(self) -> int:
        return self.exp_pos.shape[0]

    @classmethod
    def build(cls, g: AntisymmetricMatrix, step: float) -> "MagneticFlowCache":
        if step <= 0:
            raise ValueError(f"step must be positive, got {step}")
        dec = block_decompose(g)
        exp_pos, psi_pos = _flow_operators(dec, step, +1)
        exp_neg, psi_neg = _flow_operators(dec, step, -1)
        return cls(step, g.entries.copy(), exp_pos, exp_neg, psi_pos, psi_neg)


def _flow_operators(dec, step, sign):
    """Return (exp(sign*G*step), Psi(sign*G*step)) from the block form."""
    d = dec.dim
    if len(dec.rotation_rates) == 0:
        # G == 0: exact identity / Euler translation, kept bit-exact.
        return np.eye(d), step * np.eye(d)

    exp_b = np.zeros((d, d))
    psi_b = np.zeros((d, d))
    for k, rate in enumerate(dec.rotation_rates):
        angle = sign * rate * step
        c, s = np.cos(angle), np.sin(angle)
        # 2*sin^2(angle/2) is the cancellation-free form of 1 - cos(angle).
        versin = 2.0 * np.sin(0.5 * angle) ** 2
        i = 2 * k
        exp_b[i, i] = c
        exp_b[i, i + 1] = -s
        exp_b[i + 1, i] = s
        exp_b[i + 1, i + 1] = c
        r = sign * rate
        psi_b[i, i] = s / r
        psi_b[i, i + 1] = -versin / r
        psi_b[i + 1, i] = versin / r
        psi_b[i + 1, i + 1] = s / r
    for j in range(d - dec.null_dim, d):
        exp_b[j, j] = 1.0
        psi_b[j, j] = step

    q = dec.basis
    return q @ exp_b @ q.T, q @ psi_b @ q.T


def momentum_flow(cache: MagneticFlowCache, sign: int, theta, p, f_matrix=None):
    """Advance (theta, p) by the exact momentum-rotation sub-flow.

    Solves d(theta)/dt = F p, dp/dt = sign*G p over the cached step:
    theta' = theta + F Psi(sign*G*eps) p and p' = exp(sign*G*eps) p.
    On the null space of G the position update degenerates to eps * p.

    Args:
        cache: Flow operators for +-G at the step size.
        sign: +1 or -1, selecting which cached sign of G drives the flow.
        theta: Position, shape (d,) or batched (..., d).
        p: Momentum, same shape as theta.
        f_matrix: Optional invertible d x d matrix; identity when omitted.

    Returns:
        (theta', p') with the same shapes as the inputs.
    """
    if sign not in (+1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    theta = np.asarray(theta, dtype=float)
    p = np.asarray(p, dtype=float)
    d = cache.dim
    if theta.shape != p.shape or theta.shape[-1] != d:
        raise DimensionMismatch(
            f"theta {theta.shape} / p {p.shape} incompatible with flow dim {d}"
        )
    if f_matrix is not None and np.asarray(f_matrix).shape != (d, d):
        raise DimensionMismatch(
            f"F has shape {np.asarray(f_matrix).shape}, expected {(d, d)}"
        )

    exp_m = cache.exp_pos if sign > 0 else cache.exp_neg
    psi_m = cache.psi_pos if sign > 0 else cache.psi_neg
    drift = p @ psi_m.T
    if f_matrix is not None:
        drift = drift @ np.asarray(f_matrix, dtype=float).T
    return theta + drift, p @ exp_m.T
