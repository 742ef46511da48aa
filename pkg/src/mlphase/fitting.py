"""Maximum-likelihood fitting of PMML models with structured PH components.

The optimizer is a multi-start Nelder-Mead simplex over an unconstrained
reparametrization: alpha through a logistic map into (0,1), nu and rates
through log maps, mixture weights through softmax. Restarts draw jittered
initial points from split sub-streams, so results are deterministic per seed
and adding restarts can only improve the returned NLL.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy.optimize import minimize

from .distributions import MMLDist, PMMLDist, dist_to_doc, pmml_logpdf
from .errors import EvaluationError, ValidationError
from .phasetype import make_coxian, make_erlang, make_mixture_erlang
from .rng import RandomStream

MIXTURE_ERLANG = "mixture_erlang"
COXIAN = "coxian"
EXPONENTIAL = "exponential"
_STRUCTURES = (MIXTURE_ERLANG, COXIAN, EXPONENTIAL)


@dataclass(frozen=True)
class FitConfig:
    """Model structure and optimizer budget for fit_pmml.

    structure selects the PH component family: "mixture_erlang" with a fixed
    shape vector, "coxian" with a dimension, or "exponential". Pinned values
    are used when fit_alpha or fit_nu is False. shape_grid, when given, runs
    one full fit per candidate shape vector.
    """

    structure: str = MIXTURE_ERLANG
    shapes: tuple = (1,)
    dimension: int = 1
    fit_nu: bool = True
    fit_alpha: bool = True
    pinned_alpha: float = 1.0
    pinned_nu: float = 1.0
    restarts: int = 5
    max_iterations: int = 2000
    convergence_tol: float = 1e-8
    shape_grid: tuple | None = None

    def __post_init__(self):
        if self.structure not in _STRUCTURES:
            raise ValidationError(f"unknown structure {self.structure!r}")
        object.__setattr__(self, "shapes", tuple(int(p) for p in self.shapes))
        if self.structure == MIXTURE_ERLANG:
            if not self.shapes or any(p < 1 for p in self.shapes):
                raise ValidationError("shapes must be positive integers")
        if self.structure == COXIAN and self.dimension < 1:
            raise ValidationError("dimension must be a positive integer")
        if self.restarts < 1:
            raise ValidationError("restarts must be >= 1")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be >= 1")
        if not 1e-12 <= self.convergence_tol <= 1e-4:
            raise ValidationError("convergence_tol must lie in [1e-12, 1e-4]")
        if not self.fit_alpha and not 0.0 < self.pinned_alpha <= 1.0:
            raise ValidationError("pinned_alpha must lie in (0, 1]")
        if not self.fit_nu and self.pinned_nu <= 0.0:
            raise ValidationError("pinned_nu must be positive")
        if self.shape_grid is not None:
            grid = tuple(tuple(int(p) for p in s) for s in self.shape_grid)
            object.__setattr__(self, "shape_grid", grid)
            if not grid:
                raise ValidationError("shape_grid must be nonempty when given")
            if self.structure != MIXTURE_ERLANG:
                raise ValidationError("shape_grid applies to mixture_erlang only")


@dataclass(frozen=True)
class FitResult:
    """Best model found, its NLL, tail index, and the restart trace."""

    model: PMMLDist | None
    nll: float
    tail_index: float
    tail_index_reciprocal: float
    restart_nlls: tuple
    converged: bool
    config: FitConfig
    seed: tuple
    error: str | None = None

    def to_json(self) -> str:
        doc = {
            "model": None if self.model is None else dist_to_doc(self.model),
            "nll": self.nll,
            "tail_index": self.tail_index,
            "tail_index_reciprocal": self.tail_index_reciprocal,
            "restart_nlls": list(self.restart_nlls),
            "converged": self.converged,
            "config": asdict(self.config),
            "seed": {"seed": self.seed[0], "spawn_key": list(self.seed[1])},
            "error": self.error,
        }
        if doc["config"]["shape_grid"] is not None:
            doc["config"]["shape_grid"] = [list(s) for s in self.config.shape_grid]
        doc["config"]["shapes"] = list(self.config.shapes)
        return json.dumps(doc, indent=2)


def _check_data(data) -> np.ndarray:
    x = np.asarray(data, dtype=float).reshape(-1)
    if x.size == 0:
        raise ValidationError("data must be nonempty")
    if not np.all(np.isfinite(x)) or np.any(x <= 0.0):
        raise ValidationError("data values must be positive and finite")
    return x


def nll(model: PMMLDist, data) -> float:
    """Negative log-likelihood -sum log pmml_pdf(x_i).

    Any non-finite log-density maps to the infinite-NLL sentinel so the
    optimizer treats the iterate as rejected rather than crashing.
    """
    x = _check_data(data)
    try:
        lp = pmml_logpdf(model, x)
    except (ValidationError, EvaluationError, FloatingPointError, OverflowError):
        return np.inf
    s = np.sum(lp)
    return float(-s) if np.isfinite(s) else np.inf


# ---------------------------------------------------------------------------
# unconstrained reparametrization

def _n_components(config: FitConfig) -> int:
    if config.structure == MIXTURE_ERLANG:
        return len(config.shapes)
    if config.structure == COXIAN:
        return config.dimension
    return 1


def _n_params(config: FitConfig) -> int:
    m = _n_components(config)
    n = int(config.fit_alpha) + int(config.fit_nu) + m
    if config.structure in (MIXTURE_ERLANG, COXIAN):
        n += m - 1
    return n


def _sigmoid(x: float) -> float:
    if x >= 0.0:
        return 1.0 / (1.0 + np.exp(-x))
    e = np.exp(x)
    return e / (1.0 + e)


def _softmax(raw: np.ndarray) -> np.ndarray:
    z = np.concatenate(([0.0], raw))
    z = z - z.max()
    w = np.exp(z)
    return w / w.sum()


def _decode(theta: np.ndarray, config: FitConfig) -> PMMLDist:
    """Map an unconstrained parameter vector to a PMML model.

    Raises ValidationError when the iterate leaves the feasible region
    (e.g. softmax underflow or colliding Coxian rates); callers convert
    that to the infinite-NLL sentinel.
    """
    pos = 0
    if config.fit_alpha:
        alpha = _sigmoid(theta[pos])
        pos += 1
    else:
        alpha = config.pinned_alpha
    if config.fit_nu:
        nu = np.exp(theta[pos])
        pos += 1
    else:
        nu = config.pinned_nu
    m = _n_components(config)
    if config.structure in (MIXTURE_ERLANG, COXIAN):
        weights = _softmax(theta[pos:pos + m - 1])
        pos += m - 1
    rates = np.exp(theta[pos:pos + m])
    pos += m

    if config.structure == MIXTURE_ERLANG:
        gen = make_mixture_erlang(weights, config.shapes, rates)
    elif config.structure == COXIAN:
        gen = make_coxian(weights, rates)
    else:
        gen = make_erlang(1, float(rates[0]))
    return PMMLDist(MMLDist(alpha, gen), nu)


def _logit(p: float) -> float:
    p = min(max(p, 1e-12), 1.0 - 1e-12)
    return float(np.log(p / (1.0 - p)))


def _initial_point(data: np.ndarray, config: FitConfig) -> np.ndarray:
    """Moment-matched starting point in the unconstrained coordinates.

    Component rates are placed so that each component's bulk sits near a
    spread of data quantiles on the x^(alpha0*nu0) scale; weights start
    uniform.
    """
    alpha0 = 0.9 if config.fit_alpha else config.pinned_alpha
    nu0 = 1.0 if config.fit_nu else config.pinned_nu
    power = alpha0 * nu0
    m = _n_components(config)

    theta = []
    if config.fit_alpha:
        theta.append(_logit(alpha0))
    if config.fit_nu:
        theta.append(np.log(nu0))
    if config.structure in (MIXTURE_ERLANG, COXIAN):
        theta.extend([0.0] * (m - 1))

    if config.structure == MIXTURE_ERLANG:
        qs = np.quantile(data, (np.arange(m) + 0.5) / m)
        qs = np.maximum(qs, 1e-12)
        shapes = np.asarray(config.shapes, dtype=float)
        rates = shapes / qs ** power
    elif config.structure == COXIAN:
        med = max(float(np.median(data)), 1e-12)
        base = 1.0 / med ** power
        rates = base * 3.0 ** (np.arange(m) - (m - 1) / 2.0)
    else:
        med = max(float(np.median(data)), 1e-12)
        rates = np.array([np.log(2.0) / med ** power])
    theta.extend(np.log(rates))
    return np.asarray(theta, dtype=float)


def _jitter(theta0: np.ndarray, config: FitConfig, stream: RandomStream) -> np.ndarray:
    g = stream.generator
    theta = theta0.copy()
    pos = 0
    if config.fit_alpha:
        theta[pos] += g.normal(0.0, 0.75)
        pos += 1
    if config.fit_nu:
        theta[pos] += g.uniform(-np.log(4.0), np.log(4.0))
        pos += 1
    m = _n_components(config)
    if config.structure in (MIXTURE_ERLANG, COXIAN):
        theta[pos:pos + m - 1] += g.normal(0.0, 0.5, m - 1)
        pos += m - 1
    # log-uniform rate jitter over one decade each way
    theta[pos:pos + m] += g.uniform(-np.log(10.0), np.log(10.0), m)
    return theta


# ---------------------------------------------------------------------------
# optimization

def _objective(data: np.ndarray, config: FitConfig):
    def obj(theta):
        try:
            model = _decode(theta, config)
        except (ValidationError, EvaluationError, OverflowError):
            return np.inf
        return nll(model, data)

    return obj


def _canonical_model(model: PMMLDist, config: FitConfig):
    """Sort mixture components by ascending rate to kill label switching."""
    if config.structure != MIXTURE_ERLANG:
        return model
    gen = model.ph
    w = np.asarray(gen.params["weights"], dtype=float)
    shapes = np.asarray(gen.params["shapes"], dtype=int)
    rates = np.asarray(gen.params["rates"], dtype=float)
    order = np.argsort(rates)
    gen2 = make_mixture_erlang(w[order], shapes[order], rates[order])
    return PMMLDist(MMLDist(model.alpha, gen2), model.nu)


def _fit_single(data: np.ndarray, config: FitConfig, stream: RandomStream) -> FitResult:
    obj = _objective(data, config)
    theta0 = _initial_point(data, config)
    fbase = obj(theta0)
    fscale = 1.0 + (abs(fbase) if np.isfinite(fbase) else float(len(data)))
    fatol = config.convergence_tol * fscale
    ndim = _n_params(config)

    best_theta = None
    best_nll = np.inf
    best_ok = False
    trace = []
    for i in range(config.restarts):
        start = theta0 if i == 0 else _jitter(theta0, config, stream.child(i))
        with np.errstate(invalid="ignore"):
            res = minimize(
                obj,
                start,
                method="Nelder-Mead",
                options=dict(
                    maxiter=config.max_iterations,
                    maxfev=2 * config.max_iterations,
                    xatol=1e-5,
                    fatol=fatol,
                    adaptive=ndim > 4,
                ),
            )
            ok = bool(res.success)
            fun, x = float(res.fun), res.x
            if np.isfinite(fun):
                # polish each restart with a tighter simplex so the reported
                # minimum is monotone in the restart count
                res2 = minimize(
                    obj,
                    x,
                    method="Nelder-Mead",
                    options=dict(
                        maxiter=config.max_iterations,
                        maxfev=2 * config.max_iterations,
                        xatol=1e-9,
                        fatol=fatol * 1e-2,
                    ),
                )
                if res2.fun <= fun:
                    fun, x = float(res2.fun), res2.x
                    ok = ok or bool(res2.success)
        trace.append(fun)
        if fun < best_nll:
            best_nll = fun
            best_theta = x
            best_ok = ok

    converged = best_ok and np.isfinite(best_nll)

    seed = (stream.seed, tuple(stream.spawn_key))
    if best_theta is None or not np.isfinite(best_nll):
        return FitResult(
            model=None,
            nll=np.inf,
            tail_index=np.nan,
            tail_index_reciprocal=np.nan,
            restart_nlls=tuple(trace),
            converged=False,
            config=config,
            seed=seed,
            error="all restarts diverged",
        )
    model = _canonical_model(_decode(best_theta, config), config)
    ti = float(model.tail_index)
    return FitResult(
        model=model,
        nll=float(best_nll),
        tail_index=ti,
        tail_index_reciprocal=1.0 / ti,
        restart_nlls=tuple(trace),
        converged=bool(converged),
        config=config,
        seed=seed,
        error=None,
    )


def fit_pmml(data, config: FitConfig, rng: RandomStream) -> FitResult:
    """Multi-start maximum-likelihood fit; deterministic per (data, config, seed).

    With shape_grid set, runs one full fit per candidate shape vector on its
    own sub-stream and returns the lowest-NLL winner.
    """
    x = _check_data(data)
    if config.shape_grid is not None:
        results = profile_shapes(x, config, rng)
        usable = [r for r in results if r.model is not None]
        if not usable:
            return results[0]
        return usable[0]
    return _fit_single(x, config, rng)


def profile_shapes(data, base_config: FitConfig, rng: RandomStream) -> list:
    """One full fit per candidate shape vector, ranked by NLL.

    Per-candidate failures are flagged in place (model=None, infinite NLL)
    without aborting the sweep. Likelihoods are reported raw; no information
    criteria are applied.
    """
    if base_config.shape_grid is None or not base_config.shape_grid:
        raise ValidationError("profile_shapes requires a nonempty shape_grid")
    x = _check_data(data)
    results = []
    for ci, shapes in enumerate(base_config.shape_grid):
        cfg = replace(base_config, shapes=tuple(shapes), shape_grid=None)
        stream = rng.child(ci)
        try:
            results.append(_fit_single(x, cfg, stream))
        except (ValidationError, EvaluationError) as e:
            results.append(
                FitResult(
                    model=None,
                    nll=np.inf,
                    tail_index=np.nan,
                    tail_index_reciprocal=np.nan,
                    restart_nlls=(),
                    converged=False,
                    config=cfg,
                    seed=(stream.seed, tuple(stream.spawn_key)),
                    error=str(e),
                )
            )
    order = sorted(
        range(len(results)),
        key=lambda i: (not np.isfinite(results[i].nll), results[i].nll, i),
    )
    return [results[i] for i in order]
