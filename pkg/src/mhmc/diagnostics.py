"""Chain-quality estimators: autocorrelation, ESS, MMD, bias and MCSE.

The squared maximum mean discrepancy uses the quadratic kernel
k(x, x') = (1 + <x, x'>)^2, for which the biased V-statistic reduces
exactly to moment differences:

    MMD^2 = 2 ||mean_X - mean_Y||^2 + ||M_X - M_Y||_F^2,

with M the empirical second-moment matrix.  This is algebraically identical
to the double kernel sum but costs O(N d^2) instead of O(N^2 d).
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, TooFewChains, ZeroVariance


@dataclass(frozen=True)
class ChainDiagnostics:
    """Summary statistics of one chain: see the producing functions."""

    autocorr: np.ndarray  # per lag, averaged over coordinates
    ess: np.ndarray  # per coordinate
    mean_acceptance: float


def _as_chain(chain) -> np.ndarray:
    chain = np.asarray(chain, dtype=float)
    if chain.ndim == 1:
        chain = chain[:, None]
    if chain.ndim != 2:
        raise DimensionMismatch(f"chain must be (N, d), got shape {chain.shape}")
    return chain


def _autocovariance(x: np.ndarray) -> np.ndarray:
    """Biased empirical autocovariance of a 1-D series via FFT."""
    n = x.size
    centered = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    spectrum = np.fft.rfft(centered, size)
    acov = np.fft.irfft(spectrum * np.conj(spectrum), size)[:n]
    return acov / n


def autocorrelation(chain, max_lag: int) -> np.ndarray:
    """Normalized autocorrelation per lag 0..max_lag, coordinate-averaged.

    Raises:
        ZeroVariance: If any coordinate is constant.
        ValueError: If the chain is not longer than max_lag.
    """
    chain = _as_chain(chain)
    n, dim = chain.shape
    if n <= max_lag:
        raise ValueError(f"chain length {n} must exceed max_lag {max_lag}")
    curves = np.empty((dim, max_lag + 1))
    for j in range(dim):
        acov = _autocovariance(chain[:, j])
        if acov[0] <= 0.0:
            raise ZeroVariance(f"coordinate {j} has zero variance")
        curves[j] = acov[: max_lag + 1] / acov[0]
    return curves.mean(axis=0)


def effective_sample_size(chain, coordinate: int = 0) -> float:
    """ESS = N / (1 + 2 sum rho_k) with initial-positive-sequence truncation.

    Consecutive autocorrelations are summed in pairs and the sum is cut at
    the first non-positive pair; the result is clipped to [1, N].

    Raises:
        ZeroVariance: If the coordinate is constant (and N > 1).
    """
    chain = _as_chain(chain)
    x = chain[:, coordinate]
    n = x.size
    if n <= 1:
        return float(max(n, 1))
    acov = _autocovariance(x)
    if acov[0] <= 0.0:
        raise ZeroVariance(f"coordinate {coordinate} has zero variance")
    rho = acov / acov[0]
    tau = -1.0
    for m in range(n // 2):
        pair = rho[2 * m] + (rho[2 * m + 1] if 2 * m + 1 < n else 0.0)
        if pair <= 0.0:
            break
        tau += 2.0 * pair
    tau = max(tau, 1e-12)
    return float(np.clip(n / tau, 1.0, n))


def mmd_squared(x_samples, y_samples) -> float:
    """Biased V-statistic MMD^2 under the quadratic kernel (1 + <x, y>)^2.

    Symmetric in its arguments and nonnegative; identical samples give 0.

    Raises:
        DimensionMismatch: On empty input or mismatched dimensions.
    """
    x = np.atleast_2d(np.asarray(x_samples, dtype=float))
    y = np.atleast_2d(np.asarray(y_samples, dtype=float))
    if x.size == 0 or y.size == 0:
        raise DimensionMismatch("sample sets must be nonempty")
    if x.shape[1] != y.shape[1]:
        raise DimensionMismatch(
            f"sample dimensions differ: {x.shape[1]} vs {y.shape[1]}"
        )
    mean_diff = x.mean(axis=0) - y.mean(axis=0)
    moment_diff = x.T @ x / x.shape[0] - y.T @ y / y.shape[0]
    return float(2.0 * mean_diff @ mean_diff + np.sum(moment_diff * moment_diff))


def mmd_squared_prefix_curve(x_samples, y_samples, stride: int):
    """MMD^2 of growing sample prefixes against the full reference set.

    Returns (counts, values) for prefix sizes stride, 2*stride, ..., N.
    """
    x = np.atleast_2d(np.asarray(x_samples, dtype=float))
    counts = list(range(stride, x.shape[0] + 1, stride))
    if not counts or counts[-1] != x.shape[0]:
        counts.append(x.shape[0])
    values = [mmd_squared(x[:count], y_samples) for count in counts]
    return np.array(counts), np.array(values)


def summarize_chain(thetas, accepted, max_lag: int) -> ChainDiagnostics:
    """Bundle autocorrelation curve, per-coordinate ESS and acceptance."""
    thetas = _as_chain(thetas)
    ess = np.array(
        [effective_sample_size(thetas, j) for j in range(thetas.shape[1])]
    )
    return ChainDiagnostics(
        autocorrelation(thetas, max_lag), ess, float(np.mean(accepted))
    )


def bias_and_mcse(chains, moment_fn, truth: float):
    """Across-chain bias and Monte Carlo standard error of a moment.

    ``moment_fn`` maps an (N, d) chain to per-sample scalars; the per-chain
    moment is their mean.  Bias is |grand mean - truth|; the MCSE is the
    across-chain standard deviation divided by sqrt(#chains).

    Raises:
        TooFewChains: With fewer than two chains.
    """
    if len(chains) < 2:
        raise TooFewChains(f"need >= 2 chains, got {len(chains)}")
    moments = np.array([float(np.mean(moment_fn(_as_chain(c)))) for c in chains])
    bias = abs(float(moments.mean()) - truth)
    mcse = float(moments.std(ddof=1) / np.sqrt(len(chains)))
    return bias, mcse
