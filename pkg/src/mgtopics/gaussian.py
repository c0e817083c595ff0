"""Multivariate Gaussian components, mixtures, and EM fitting.

Densities are evaluated in log space through a Cholesky factorization (no
explicit matrix inversion). Covariances are kept positive definite either by
a diagonal restriction or by convex shrinkage toward the diagonal plus a
ridge floor; the sample estimator stays the pre-regularization target.
"""

from collections.abc import Sequence
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np
from scipy.linalg import solve_triangular

from .errors import ConfigError, NumericalError

INIT_MODES = ("kmeans-like", "random-responsibility")
COVARIANCE_MODES = ("diagonal", "full-shrinkage")
EMPTY_CLUSTER_POLICIES = ("reinit-farthest", "fail")

# Mass below which a component counts as empty in the M-step.
_EMPTY_MASS = 1e-10


@dataclass
class CovarianceRep:
    """Covariance of one component.

    diagonal: only per-dimension variances, floored at ``ridge``.
    full-shrinkage: stores (1-shrinkage)*S + shrinkage*diag(S) + ridge*I
    where S is the weighted sample covariance.
    """

    mode: str
    diag: np.ndarray
    full: Optional[np.ndarray] = None
    shrinkage: float = 0.0
    ridge: float = 1e-6

    def matrix(self) -> np.ndarray:
        if self.mode == "diagonal":
            return np.diag(self.diag)
        return self.full


@dataclass
class GaussianComponent:
    mean: np.ndarray
    cov: CovarianceRep


@dataclass
class Responsibilities:
    """N x K posterior component memberships; rows sum to one."""

    matrix: np.ndarray

    def masses(self) -> np.ndarray:
        return self.matrix.sum(axis=0)


@dataclass
class GmmModel:
    components: list[GaussianComponent]
    weights: np.ndarray
    loglik_trace: list[float]
    iterations: int
    seed: int
    converged: bool = True
    config: dict = field(default_factory=dict)

    @property
    def n_components(self) -> int:
        return len(self.components)

    @property
    def n_features(self) -> int:
        return self.components[0].mean.shape[0]

    @property
    def mode(self) -> str:
        return self.components[0].cov.mode


@dataclass
class EmConfig:
    n_components: int
    max_iterations: int = 500
    tolerance: float = 1e-6
    init: str = "kmeans-like"
    covariance: str = "diagonal"
    shrinkage: float = 0.1
    ridge: Optional[float] = None  # None: 1e-6 * mean data variance, set at fit time
    seed: int = 0
    empty_cluster: str = "reinit-farthest"

    def __post_init__(self):
        if self.n_components < 1:
            raise ConfigError("n_components must be >= 1")
        if self.tolerance < 0:
            raise ConfigError("tolerance must be >= 0")
        if self.init not in INIT_MODES:
            raise ConfigError(f"init must be one of {INIT_MODES}")
        if self.covariance not in COVARIANCE_MODES:
            raise ConfigError(f"covariance must be one of {COVARIANCE_MODES}")
        if not 0.0 <= self.shrinkage <= 1.0:
            raise ConfigError("shrinkage must lie in [0, 1]")
        if self.ridge is not None and self.ridge <= 0:
            raise ConfigError("ridge must be positive")
        if self.empty_cluster not in EMPTY_CLUSTER_POLICIES:
            raise ConfigError(f"empty_cluster must be one of {EMPTY_CLUSTER_POLICIES}")


def resolve_ridge(data: np.ndarray, cfg: EmConfig) -> float:
    """Scale-aware ridge floor: 1e-6 of the mean per-dimension variance."""
    if cfg.ridge is not None:
        return cfg.ridge
    scale = float(np.mean(np.var(data, axis=0)))
    return max(1e-6 * scale, 1e-12)


def _log_density_rows(data: np.ndarray, comp: GaussianComponent) -> np.ndarray:
    """Log N(x | mean, cov) for every row of ``data``."""
    diff = data - comp.mean
    dim = data.shape[1]
    cov = comp.cov
    if cov.mode == "diagonal":
        logdet = float(np.sum(np.log(cov.diag)))
        quad = np.sum(diff * diff / cov.diag, axis=1)
    else:
        try:
            chol = np.linalg.cholesky(cov.full)
        except np.linalg.LinAlgError as exc:
            eig = np.linalg.eigvalsh(cov.full)
            raise NumericalError(
                "covariance factorization failed after regularization: "
                f"eigenvalue range [{eig[0]:.3e}, {eig[-1]:.3e}]"
            ) from exc
        logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
        solved = solve_triangular(chol, diff.T, lower=True)
        quad = np.sum(solved * solved, axis=0)
    return -0.5 * (dim * np.log(2.0 * np.pi) + logdet + quad)


def log_density(x: np.ndarray, comp: GaussianComponent) -> float:
    """Log density of one point under one Gaussian component."""
    x = np.asarray(x, dtype=float)
    if x.shape != comp.mean.shape:
        raise ConfigError(f"dimension mismatch: point {x.shape}, mean {comp.mean.shape}")
    return float(_log_density_rows(x[None, :], comp)[0])


def _log_joint(data: np.ndarray, model: GmmModel) -> np.ndarray:
    """N x K matrix of log(weight_j) + log N(x_k | component j)."""
    n = data.shape[0]
    out = np.empty((n, model.n_components))
    with np.errstate(divide="ignore"):
        log_w = np.log(model.weights)
    for j, comp in enumerate(model.components):
        out[:, j] = log_w[j] + _log_density_rows(data, comp)
    return out


def e_step(data: np.ndarray, model: GmmModel) -> tuple[Responsibilities, float]:
    """Posterior responsibilities and total log-likelihood.

    Computed in log space with max-subtraction, so extreme density ratios
    normalize without overflow.
    """
    data = np.asarray(data, dtype=float)
    log_joint = _log_joint(data, model)
    if not np.all(np.isfinite(log_joint)):
        bad = np.argwhere(~np.isfinite(log_joint))[0]
        raise NumericalError(
            f"non-finite density for document {bad[0]}, component {bad[1]}"
        )
    row_max = log_joint.max(axis=1, keepdims=True)
    shifted = log_joint - row_max
    log_norm = row_max[:, 0] + np.log(np.sum(np.exp(shifted), axis=1))
    resp = np.exp(log_joint - log_norm[:, None])
    return Responsibilities(matrix=resp), float(np.sum(log_norm))


def _empty_reinit_point(resp: np.ndarray, healthy: np.ndarray, used: set[int]) -> int:
    """Pick the data point least claimed by any healthy component."""
    if healthy.any():
        claim = resp[:, healthy].max(axis=1)
    else:
        claim = resp.max(axis=1)
    order = np.argsort(claim, kind="stable")
    for k in order:
        if int(k) not in used:
            return int(k)
    return int(order[0])


def m_step(
    data: np.ndarray, resp: Responsibilities, cfg: EmConfig
) -> tuple[np.ndarray, list[GaussianComponent]]:
    """Re-estimate weights, means, and covariances from responsibilities.

    Covariances use the freshly updated means. Components whose mass
    vanished are handled per ``cfg.empty_cluster``.
    """
    data = np.asarray(data, dtype=float)
    r = resp.matrix
    n_docs, n_dims = data.shape
    n_comp = r.shape[1]
    ridge = resolve_ridge(data, cfg)

    masses = r.sum(axis=0)
    empty = masses < _EMPTY_MASS
    if empty.any() and cfg.empty_cluster == "fail":
        j = int(np.argmax(empty))
        raise NumericalError(f"component {j} received no responsibility mass")

    weights = masses / n_docs
    means = np.zeros((n_comp, n_dims))
    components: list[GaussianComponent] = []
    global_var = np.maximum(np.var(data, axis=0), ridge)
    used_points: set[int] = set()

    for j in range(n_comp):
        if empty[j]:
            k = _empty_reinit_point(r, ~empty, used_points)
            used_points.add(k)
            means[j] = data[k].copy()
            weights[j] = 1.0 / n_docs
            if cfg.covariance == "diagonal":
                cov = CovarianceRep("diagonal", diag=global_var.copy(), ridge=ridge)
            else:
                full = np.diag(global_var) + ridge * np.eye(n_dims)
                cov = CovarianceRep(
                    "full-shrinkage",
                    diag=np.diag(full).copy(),
                    full=full,
                    shrinkage=cfg.shrinkage,
                    ridge=ridge,
                )
            components.append(GaussianComponent(mean=means[j].copy(), cov=cov))
            continue

        means[j] = r[:, j] @ data / masses[j]
        diff = data - means[j]
        if cfg.covariance == "diagonal":
            var = r[:, j] @ (diff * diff) / masses[j]
            cov = CovarianceRep(
                "diagonal", diag=np.maximum(var, ridge), ridge=ridge
            )
        else:
            sample = (r[:, j, None] * diff).T @ diff / masses[j]
            sample = 0.5 * (sample + sample.T)
            lam = cfg.shrinkage
            full = (1.0 - lam) * sample + lam * np.diag(np.diag(sample))
            full[np.diag_indices_from(full)] += ridge
            cov = CovarianceRep(
                "full-shrinkage",
                diag=np.diag(full).copy(),
                full=full,
                shrinkage=lam,
                ridge=ridge,
            )
        components.append(GaussianComponent(mean=means[j].copy(), cov=cov))

    weights = weights / weights.sum()
    return weights, components


def _farthest_point_means(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Farthest-point seeding: random first seed, then grow min-distance."""
    n = data.shape[0]
    chosen = [int(rng.integers(n))]
    min_dist = np.sum((data - data[chosen[0]]) ** 2, axis=1)
    while len(chosen) < k:
        nxt = int(np.argmax(min_dist))
        chosen.append(nxt)
        min_dist = np.minimum(min_dist, np.sum((data - data[nxt]) ** 2, axis=1))
    return data[chosen].copy()


def _initialize(
    data: np.ndarray, cfg: EmConfig, rng: np.random.Generator
) -> tuple[np.ndarray, list[GaussianComponent]]:
    n_docs, n_dims = data.shape
    k = cfg.n_components
    ridge = resolve_ridge(data, cfg)
    if cfg.init == "kmeans-like":
        means = _farthest_point_means(data, k, rng)
        weights = np.full(k, 1.0 / k)
        components = []
        for j in range(k):
            if cfg.covariance == "diagonal":
                cov = CovarianceRep("diagonal", diag=np.ones(n_dims), ridge=ridge)
            else:
                cov = CovarianceRep(
                    "full-shrinkage",
                    diag=np.ones(n_dims),
                    full=np.eye(n_dims),
                    shrinkage=cfg.shrinkage,
                    ridge=ridge,
                )
            components.append(GaussianComponent(mean=means[j].copy(), cov=cov))
        return weights, components
    # random-responsibility: rows from a symmetric Dirichlet-style draw
    draws = rng.gamma(shape=1.0, scale=1.0, size=(n_docs, k))
    resp = Responsibilities(matrix=draws / draws.sum(axis=1, keepdims=True))
    return m_step(data, resp, cfg)


def fit_em(data: np.ndarray, cfg: EmConfig) -> tuple[GmmModel, Responsibilities]:
    """Fit a Gaussian mixture by EM.

    Alternates E and M steps until the relative log-likelihood change drops
    below ``cfg.tolerance`` or ``cfg.max_iterations`` is reached. Failing to
    converge is not an error; the model records it. Deterministic for a
    fixed seed.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2:
        raise ConfigError("data must be a 2-d array")
    n_docs = data.shape[0]
    if cfg.n_components > n_docs:
        raise ConfigError(
            f"n_components={cfg.n_components} exceeds the {n_docs} data rows"
        )
    if not np.all(np.isfinite(data)):
        raise NumericalError("data contains non-finite values")

    rng = np.random.default_rng(cfg.seed)
    weights, components = _initialize(data, cfg, rng)
    model = GmmModel(
        components=components,
        weights=weights,
        loglik_trace=[],
        iterations=0,
        seed=cfg.seed,
        config=config_dict(cfg),
    )
    resp, loglik = e_step(data, model)
    trace = [loglik]

    converged = False
    iterations = 0
    for it in range(1, cfg.max_iterations + 1):
        weights, components = m_step(data, resp, cfg)
        model.weights = weights
        model.components = components
        resp, loglik = e_step(data, model)
        trace.append(loglik)
        iterations = it
        if abs(trace[-1] - trace[-2]) / (abs(trace[-2]) + 1.0) < cfg.tolerance:
            converged = True
            break

    model.loglik_trace = trace
    model.iterations = iterations
    model.converged = converged
    return model, resp


def config_dict(cfg: EmConfig) -> dict:
    return asdict(cfg)


def model_to_dict(model: GmmModel) -> dict:
    """JSON-ready representation of a fitted mixture."""
    mode = model.mode
    if mode == "diagonal":
        covariances = [comp.cov.diag.tolist() for comp in model.components]
    else:
        covariances = [comp.cov.full.reshape(-1).tolist() for comp in model.components]
    return {
        "K": model.n_components,
        "V": model.n_features,
        "mode": mode,
        "weights": model.weights.tolist(),
        "means": [comp.mean.tolist() for comp in model.components],
        "covariances": covariances,
        "loglik_trace": list(model.loglik_trace),
        "seed": model.seed,
        "config": model.config,
    }


def model_from_dict(payload: dict) -> GmmModel:
    mode = payload["mode"]
    n_dims = payload["V"]
    cfg = payload.get("config", {})
    shrinkage = cfg.get("shrinkage", 0.0)
    ridge = cfg.get("ridge") or 1e-12
    components = []
    for mean, cov in zip(payload["means"], payload["covariances"]):
        mean = np.asarray(mean, dtype=float)
        if mode == "diagonal":
            rep = CovarianceRep("diagonal", diag=np.asarray(cov, dtype=float), ridge=ridge)
        else:
            full = np.asarray(cov, dtype=float).reshape(n_dims, n_dims)
            rep = CovarianceRep(
                "full-shrinkage",
                diag=np.diag(full).copy(),
                full=full,
                shrinkage=shrinkage,
                ridge=ridge,
            )
        components.append(GaussianComponent(mean=mean, cov=rep))
    return GmmModel(
        components=components,
        weights=np.asarray(payload["weights"], dtype=float),
        loglik_trace=[float(x) for x in payload["loglik_trace"]],
        iterations=len(payload["loglik_trace"]) - 1,
        seed=int(payload["seed"]),
        config=cfg,
    )
