"""Benchmark harness: declarative experiment configs, orchestration, CSV output.

An experiment is described by a TOML file with [target], [sampler], [g] and
optional [mmd] / [output] sections; see the shipped presets.  Runs are
deterministic for a fixed seed: every chain draws from its own counter-based
stream keyed by (seed, chain_index), and output files are written by the
orchestrator after all chains finish.
"""

import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from .diagnostics import (
    bias_and_mcse,
    mmd_squared,
    mmd_squared_prefix_curve,
    summarize_chain,
)
from .errors import ConfigError, NotAntisymmetric, NotSPD
from .fhn import FhnObservationSet, fhn_posterior, synthesize_observations
from .integrators import run_leapfrog
from .samplers import ChainsResult, SamplerConfig, chain_rng, run_chains
from .skewflow import AntisymmetricMatrix, MagneticFlowCache, validate_antisymmetric
from .targets import TargetDensity, banana_target, funnel_target, gaussian_target, mixture_target

SAMPLER_KINDS = ("hmc", "mhmc", "preconditioned")
DEFAULT_MAX_LAG = 50


@dataclass(frozen=True)
class ExperimentSpec:
    """Parsed experiment configuration."""

    name: str
    target: dict
    sampler_kind: str
    epsilon: float
    n_leapfrog: int
    n_samples: int
    burn_in: int
    n_chains: int
    seed: int
    init: Optional[list]
    g_spec: dict
    mass: Optional[list] = None
    mmd: Optional[dict] = None
    out_dir: str = ""
    max_lag: int = DEFAULT_MAX_LAG


def _require(table: dict, key: str, section: str):
    if key not in table:
        raise ConfigError(f"[{section}] is missing required key '{key}'")
    return table[key]


def load_experiment(path) -> ExperimentSpec:
    """Parse and validate a TOML experiment file.

    Raises:
        ConfigError: With the offending section/field in the message.
    """
    path = Path(path)
    try:
        with open(path, "rb") as handle:
            raw = tomllib.load(handle)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    name = raw.get("name", path.stem)
    target = raw.get("target")
    if not isinstance(target, dict):
        raise ConfigError("missing [target] section")
    if "kind" not in target:
        raise ConfigError("[target] is missing required key 'kind'")

    sampler = raw.get("sampler")
    if not isinstance(sampler, dict):
        raise ConfigError("missing [sampler] section")
    kind = _require(sampler, "kind", "sampler")
    if kind not in SAMPLER_KINDS:
        raise ConfigError(
            f"[sampler].kind must be one of {SAMPLER_KINDS}, got '{kind}'"
        )
    epsilon = float(_require(sampler, "epsilon", "sampler"))
    if epsilon <= 0:
        raise ConfigError(f"[sampler].epsilon must be positive, got {epsilon}")
    # n_leapfrog == 0 is legal for trace mode (start point only).
    n_leapfrog = int(_require(sampler, "n_leapfrog", "sampler"))
    if n_leapfrog < 0:
        raise ConfigError(f"[sampler].n_leapfrog must be >= 0, got {n_leapfrog}")
    n_samples = int(_require(sampler, "n_samples", "sampler"))
    if n_samples < 0:
        raise ConfigError(f"[sampler].n_samples must be >= 0, got {n_samples}")
    burn_in = int(sampler.get("burn_in", 0))
    if burn_in < 0 or burn_in >= max(n_samples, 1):
        raise ConfigError(
            f"[sampler].burn_in must be in [0, n_samples), got {burn_in}"
        )
    n_chains = int(sampler.get("n_chains", 1))
    if n_chains < 1:
        raise ConfigError(f"[sampler].n_chains must be >= 1, got {n_chains}")
    seed = int(_require(sampler, "seed", "sampler"))

    g_spec = raw.get("g", {"kind": "zero"})
    if "kind" not in g_spec:
        raise ConfigError("[g] is missing required key 'kind'")
    output = raw.get("output", {})

    return ExperimentSpec(
        name=name,
        target=dict(target),
        sampler_kind=kind,
        epsilon=epsilon,
        n_leapfrog=n_leapfrog,
        n_samples=n_samples,
        burn_in=burn_in,
        n_chains=n_chains,
        seed=seed,
        init=sampler.get("init"),
        g_spec=dict(g_spec),
        mass=sampler.get("mass"),
        mmd=raw.get("mmd"),
        out_dir=output.get("dir", f"results/{name}"),
        max_lag=int(raw.get("diagnostics", {}).get("max_lag", DEFAULT_MAX_LAG)),
    )


def load_target_spec(path) -> dict:
    """Read just the [target] section of a config (experiment or bare)."""
    try:
        with open(path, "rb") as handle:
            raw = tomllib.load(handle)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    target = raw.get("target")
    if not isinstance(target, dict) or "kind" not in target:
        raise ConfigError(f"{path}: missing [target] section with 'kind'")
    return dict(target)


def build_g_matrix(g_spec: dict, dim: int) -> AntisymmetricMatrix:
    """Materialize a [g] section: zero, planar, coupling or explicit."""
    kind = g_spec.get("kind", "zero")
    matrix = np.zeros((dim, dim))
    if kind == "zero":
        pass
    elif kind == "planar":
        try:
            i, j, g = int(g_spec["i"]), int(g_spec["j"]), float(g_spec["g"])
        except KeyError as exc:
            raise ConfigError(f"[g] planar spec is missing key {exc}") from exc
        if not (0 <= i < dim and 0 <= j < dim) or i == j:
            raise ConfigError(f"[g] planar indices ({i}, {j}) invalid for dim {dim}")
        matrix[j, i] = g
        matrix[i, j] = -g
    elif kind == "coupling":
        try:
            rows = [int(r) for r in g_spec["rows"]]
            cols = [int(c) for c in g_spec["cols"]]
            g = float(g_spec["g"])
        except KeyError as exc:
            raise ConfigError(f"[g] coupling spec is missing key {exc}") from exc
        if set(rows) & set(cols):
            raise ConfigError("[g] coupling rows and cols must be disjoint")
        for idx in rows + cols:
            if not 0 <= idx < dim:
                raise ConfigError(f"[g] coupling index {idx} out of range for dim {dim}")
        for r in rows:
            for c in cols:
                matrix[r, c] = g
                matrix[c, r] = -g
    elif kind == "explicit":
        try:
            matrix = np.asarray(g_spec["matrix"], dtype=float)
        except KeyError as exc:
            raise ConfigError("[g] explicit spec is missing key 'matrix'") from exc
        if matrix.shape != (dim, dim):
            raise ConfigError(
                f"[g] explicit matrix has shape {matrix.shape}, expected {(dim, dim)}"
            )
    else:
        raise ConfigError(f"[g].kind '{kind}' not one of zero/planar/coupling/explicit")
    try:
        return validate_antisymmetric(matrix)
    except NotAntisymmetric as exc:
        raise ConfigError(f"[g] matrix is not antisymmetric: {exc}") from exc


def build_target(target_spec: dict) -> TargetDensity:
    """Materialize a [target] section into a TargetDensity."""
    kind = target_spec.get("kind")
    try:
        if kind == "gaussian":
            if "cov_diag" in target_spec:
                cov = np.diag(np.asarray(target_spec["cov_diag"], dtype=float))
            else:
                cov = np.asarray(_require(target_spec, "cov", "target"), dtype=float)
            mean = np.asarray(
                target_spec.get("mean", np.zeros(cov.shape[0])), dtype=float
            )
            return gaussian_target(mean, cov)
        if kind == "mixture":
            mu = np.asarray(_require(target_spec, "mu", "target"), dtype=float)
            sigma = np.asarray(target_spec.get("sigma", np.eye(mu.size)), dtype=float)
            return mixture_target(mu, sigma)
        if kind == "funnel":
            return funnel_target(
                int(target_spec.get("n", 10)), float(target_spec.get("v_sd", 3.0))
            )
        if kind == "banana":
            return banana_target(
                float(target_spec.get("b", 0.1)), float(target_spec.get("sigma1", 10.0))
            )
        if kind == "fhn":
            return fhn_posterior(
                _fhn_observations(target_spec), dt=float(target_spec.get("dt", 0.01))
            )
    except ConfigError:
        raise
    except (NotSPD, ValueError) as exc:
        raise ConfigError(f"[target] invalid parameters: {exc}") from exc
    raise ConfigError(
        f"[target].kind '{kind}' not one of gaussian/mixture/funnel/banana/fhn"
    )


def _fhn_observations(target_spec: dict) -> FhnObservationSet:
    noise_sd = float(target_spec.get("noise_sd", 0.1))
    init_v = float(target_spec.get("init_v", -1.0))
    init_r = float(target_spec.get("init_r", 1.0))
    if "obs_csv" in target_spec:
        return FhnObservationSet.from_csv(
            target_spec["obs_csv"], noise_sd, init_v, init_r
        )
    return synthesize_observations(
        a=float(target_spec.get("a", 0.2)),
        b=float(target_spec.get("b", 0.2)),
        c=float(target_spec.get("c", 3.0)),
        n_obs=int(target_spec.get("n_obs", 200)),
        t_max=float(target_spec.get("t_max", 20.0)),
        noise_sd=noise_sd,
        seed=int(target_spec.get("data_seed", 0)),
        initial_v=init_v,
        initial_r=init_r,
        dt=float(target_spec.get("dt", 0.01)),
    )


def exact_sampler(target_spec: dict):
    """Direct sampler from a target spec, for MMD reference draws.

    Returns a callable (rng, n) -> (n, d) array, or None when the target has
    no tractable direct sampler (the ODE posterior).
    """
    kind = target_spec.get("kind")
    if kind == "gaussian":
        if "cov_diag" in target_spec:
            cov = np.diag(np.asarray(target_spec["cov_diag"], dtype=float))
        else:
            cov = np.asarray(target_spec["cov"], dtype=float)
        mean = np.asarray(target_spec.get("mean", np.zeros(cov.shape[0])), dtype=float)
        chol = np.linalg.cholesky(cov)
        return lambda rng, n: mean + rng.standard_normal((n, mean.size)) @ chol.T
    if kind == "mixture":
        mu = np.asarray(target_spec["mu"], dtype=float)
        sigma = np.asarray(target_spec.get("sigma", np.eye(mu.size)), dtype=float)
        chol = np.linalg.cholesky(sigma)

        def draw(rng, n):
            signs = rng.choice([-1.0, 1.0], size=(n, 1))
            return signs * mu + rng.standard_normal((n, mu.size)) @ chol.T

        return draw
    if kind == "funnel":
        n_low = int(target_spec.get("n", 10))
        v_sd = float(target_spec.get("v_sd", 3.0))

        def draw(rng, n):
            v = v_sd * rng.standard_normal(n)
            x = np.exp(-0.5 * v)[:, None] * rng.standard_normal((n, n_low))
            return np.concatenate([x, v[:, None]], axis=1)

        return draw
    if kind == "banana":
        b = float(target_spec.get("b", 0.1))
        sigma1 = float(target_spec.get("sigma1", 10.0))

        def draw(rng, n):
            y = rng.standard_normal((n, 2)) * np.array([sigma1, 1.0])
            return np.stack([y[:, 0], y[:, 1] - b * y[:, 0] ** 2 + b * sigma1**2], axis=1)

        return draw
    return None


def _format(value) -> str:
    return repr(float(value))


def _write_csv(path: Path, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def write_samples_csv(path: Path, result: ChainsResult, chain: int):
    """Schema: iter,accepted,energy_error,g_sign,theta_1..theta_d."""
    dim = result.thetas.shape[2]
    header = ["iter", "accepted", "energy_error", "g_sign"] + [
        f"theta_{i + 1}" for i in range(dim)
    ]
    thetas = result.thetas[chain]
    rows = (
        [
            str(n),
            str(int(result.accepted[chain, n])),
            _format(result.energy_error[chain, n]),
            str(int(result.g_sign[chain, n])),
        ]
        + [_format(x) for x in thetas[n]]
        for n in range(thetas.shape[0])
    )
    _write_csv(path, header, rows)


def _experiment_sampler_config(spec: ExperimentSpec, dim: int) -> SamplerConfig:
    g_matrix = build_g_matrix(spec.g_spec, dim)
    mass = None
    if spec.mass is not None:
        mass = np.asarray(spec.mass, dtype=float)
    try:
        return SamplerConfig(
            epsilon=spec.epsilon,
            n_leapfrog=spec.n_leapfrog,
            n_samples=spec.n_samples,
            seed=spec.seed,
            g_matrix=g_matrix,
            mass_matrix=mass,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _init_theta(spec: ExperimentSpec, target: TargetDensity) -> np.ndarray:
    if spec.init is None:
        return np.zeros(target.dim)
    init = np.asarray(spec.init, dtype=float)
    if init.shape != (target.dim,):
        raise ConfigError(
            f"[sampler].init has shape {init.shape}, expected ({target.dim},)"
        )
    return init


def run_experiment(spec: ExperimentSpec, out_dir=None) -> dict:
    """Run all chains of an experiment and write samples/diagnostics/summary.

    Returns the summary dict.  Wall time is measured around the sampling
    loop only and reported solely in summary.json, so the CSVs are
    byte-identical across re-runs with one seed.
    """
    target = build_target(spec.target)
    cfg = _experiment_sampler_config(spec, target.dim)
    init = _init_theta(spec, target)

    start = time.perf_counter()
    result = run_chains(target, init, cfg, spec.sampler_kind, spec.n_chains)
    wall_time = time.perf_counter() - start

    out = Path(out_dir if out_dir is not None else spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for chain in range(spec.n_chains):
        write_samples_csv(out / f"samples_chain_{chain:03d}.csv", result, chain)

    kept = result.thetas[:, spec.burn_in :, :]
    diag_rows, summary = _diagnostics(spec, target, result, kept, wall_time)
    _write_csv(out / "diagnostics.csv", ["metric", "coordinate", "lag", "value"], diag_rows)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def _diagnostics(spec, target, result, kept, wall_time):
    n_chains, n_kept, dim = kept.shape
    rows = []
    acceptance = result.mean_acceptance
    rows.append(["acceptance", "", "", _format(acceptance)])

    summary = {
        "name": spec.name,
        "target": spec.target.get("kind"),
        "sampler_kind": spec.sampler_kind,
        "epsilon": spec.epsilon,
        "n_leapfrog": spec.n_leapfrog,
        "n_samples": spec.n_samples,
        "burn_in": spec.burn_in,
        "n_chains": spec.n_chains,
        "seed": spec.seed,
        "acceptance_rate": acceptance if np.isfinite(acceptance) else None,
        "wall_time_s": wall_time,
    }
    if n_kept < 2:
        # Too short for any correlation-based diagnostics.
        return rows, summary

    max_lag = min(spec.max_lag, max(n_kept - 1, 1))
    per_chain = [
        summarize_chain(kept[c], result.accepted[c, spec.burn_in :], max_lag)
        for c in range(n_chains)
    ]
    curve = np.mean([d.autocorr for d in per_chain], axis=0)
    rows.extend(["autocorr", "mean", str(k), _format(v)] for k, v in enumerate(curve))

    ess = np.array([d.ess for d in per_chain])
    ess_mean = ess.mean(axis=0)
    rows.extend(
        ["ess", str(j + 1), "", _format(ess_mean[j])] for j in range(dim)
    )
    min_ess = float(ess.min(axis=1).mean())
    rows.append(["min_ess", "", "", _format(min_ess)])
    summary["ess_per_coordinate"] = [float(v) for v in ess_mean]
    summary["min_ess"] = min_ess
    summary["min_ess_per_second"] = min_ess / wall_time if wall_time > 0 else None

    if target.mean is not None and n_chains >= 2:
        chains = list(kept)
        bias_first, mcse_first, bias_second, mcse_second = [], [], [], []
        for j in range(dim):
            b1, m1 = bias_and_mcse(chains, lambda c, j=j: c[:, j], float(target.mean[j]))
            b2, m2 = bias_and_mcse(
                chains, lambda c, j=j: c[:, j] ** 2, float(target.second_moment[j])
            )
            bias_first.append(b1)
            mcse_first.append(m1)
            bias_second.append(b2)
            mcse_second.append(m2)
            rows.append(["bias_first_moment", str(j + 1), "", _format(b1)])
            rows.append(["mcse_first_moment", str(j + 1), "", _format(m1)])
            rows.append(["bias_second_moment", str(j + 1), "", _format(b2)])
            rows.append(["mcse_second_moment", str(j + 1), "", _format(m2)])
        summary["bias_first_moment"] = bias_first
        summary["mcse_first_moment"] = mcse_first
        summary["bias_second_moment"] = bias_second
        summary["mcse_second_moment"] = mcse_second

    if spec.mmd:
        draw = exact_sampler(spec.target)
        if draw is None:
            raise ConfigError("[mmd] requested but target has no direct sampler")
        n_exact = int(spec.mmd.get("n_exact", n_kept))
        exact_seed = int(spec.mmd.get("exact_seed", 0))
        stride = int(spec.mmd.get("stride", max(n_kept // 10, 1)))
        reference = draw(chain_rng(exact_seed, 0), n_exact)
        curves = [
            mmd_squared_prefix_curve(kept[c], reference, stride)
            for c in range(result.n_chains)
        ]
        counts = curves[0][0]
        mean_curve = np.mean([values for _, values in curves], axis=0)
        for count, value in zip(counts, mean_curve):
            rows.append(["mmd_sq", "", str(int(count)), _format(value)])
            rows.append(["mmd", "", str(int(count)), _format(np.sqrt(value))])
        final = float(np.mean([mmd_squared(kept[c], reference) for c in range(n_chains)]))
        summary["mmd_sq_mean"] = final
    return rows, summary


def proposal_trace(spec: ExperimentSpec, n_traces: int, out_dir=None) -> list:
    """Dump n_traces integrator trajectories from the configured start.

    Momenta are resampled per trace from the per-trace stream; every file
    follows the schema step,theta_1..theta_d,p_1..p_d and has
    n_leapfrog + 1 rows (n_leapfrog may be 0 for a start-only trace).
    """
    target = build_target(spec.target)
    g_matrix = build_g_matrix(spec.g_spec, target.dim)
    cache = None
    if spec.sampler_kind == "mhmc":
        cache = MagneticFlowCache.build(g_matrix, spec.epsilon)
    init = _init_theta(spec, target)

    out = Path(out_dir if out_dir is not None else spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    header = (
        ["step"]
        + [f"theta_{i + 1}" for i in range(target.dim)]
        + [f"p_{i + 1}" for i in range(target.dim)]
    )
    paths = []
    for trace_idx in range(n_traces):
        rng = chain_rng(spec.seed, trace_idx)
        p0 = rng.standard_normal(target.dim)
        record = []
        run_leapfrog(
            target, init, p0, spec.epsilon, spec.n_leapfrog, cache, +1, record=record
        )
        rows = (
            [str(step)] + [_format(x) for x in theta] + [_format(x) for x in p]
            for step, (theta, p) in enumerate(record)
        )
        path = out / f"trace_{trace_idx:03d}.csv"
        _write_csv(path, header, rows)
        paths.append(path)
    return paths
