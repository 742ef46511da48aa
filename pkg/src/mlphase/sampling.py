"""Exact samplers for positive stable, scalar ML, and (P)MML laws.

All samplers take a RandomStream and are deterministic given the stream.
Vector draws use size=n; size=None returns a scalar. Scalar-ML sampling uses
the exponential-mixture representation X = delta * Z * R^(1/alpha) with Z unit
exponential and R drawn by closed-form inversion of its arctan-type CDF; the
stable sampler is the classical one-uniform one-exponential transformation.
"""
from __future__ import annotations

import numpy as np

from .distributions import MMLDist, PMMLDist
from .errors import ValidationError
from .phasetype import ph_sample
from .rng import RandomStream


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not np.isfinite(alpha) or not 0.0 < alpha <= 1.0:
        raise ValidationError("alpha must lie in (0, 1]")
    return alpha


def sample_positive_stable(alpha: float, rng: RandomStream, size=None):
    """Draw from the positive stable law with Laplace transform exp(-u^alpha).

    Uses the one-sided stable transformation: with U uniform on (0, pi) and
    E unit exponential,

        S = sin(alpha U) * sin((1-alpha) U)^((1-alpha)/alpha)
            / (sin(U)^(1/alpha) * E^((1-alpha)/alpha)).

    alpha = 1 gives the degenerate law at 1 and consumes no randomness.
    """
    alpha = _check_alpha(alpha)
    scalar = size is None
    n = 1 if scalar else int(size)
    if n < 0:
        raise ValidationError("size must be nonnegative")
    if alpha == 1.0:
        out = np.ones(n)
        return 1.0 if scalar else out
    g = rng.generator
    u = g.uniform(0.0, np.pi, n)
    e = g.standard_exponential(n)
    # log-space evaluation keeps the u -> 0, pi endpoints finite-safe
    su = np.maximum(np.sin(u), 1e-300)
    sa = np.maximum(np.sin(alpha * u), 1e-300)
    sb = np.maximum(np.sin((1.0 - alpha) * u), 1e-300)
    e = np.maximum(e, 1e-300)
    r = (1.0 - alpha) / alpha
    logs = np.log(sa) + r * np.log(sb) - np.log(su) / alpha - r * np.log(e)
    out = np.exp(logs)
    return float(out[0]) if scalar else out


def ml_mixing_cdf(alpha: float, x):
    """CDF of the mixing variable R in the scalar-ML representation.

    R has the Cauchy-type density sin(alpha*pi) / (pi*alpha*(x^2 +
    2x*cos(alpha*pi) + 1)) on x >= 0, equivalently

        F(x) = (1/(pi*alpha)) * (arctan(x/sin(alpha*pi) + cot(alpha*pi))
               - pi/2) + 1,

    the unique law making Z * R^(1/alpha) Mittag-Leffler (checked against
    the transform 1/(1+u^alpha) by quadrature).
    """
    alpha = _check_alpha(alpha)
    if alpha == 1.0:
        raise ValidationError("mixing law degenerates at alpha = 1")
    x = np.asarray(x, dtype=float)
    s = np.sin(alpha * np.pi)
    c = np.cos(alpha * np.pi) / s
    val = (1.0 / (np.pi * alpha)) * (np.arctan(x / s + c) - np.pi / 2.0) + 1.0
    return val if val.ndim else float(val)


def ml_mixing_quantile(alpha: float, q):
    """Closed-form inverse of ml_mixing_cdf.

    quantile(q) = sin(alpha*pi) * cot((1-q)*pi*alpha) - cos(alpha*pi).
    """
    alpha = _check_alpha(alpha)
    if alpha == 1.0:
        raise ValidationError("mixing law degenerates at alpha = 1")
    q = np.asarray(q, dtype=float)
    if np.any((q < 0.0) | (q >= 1.0)):
        raise ValidationError("quantile level must lie in [0, 1)")
    s = np.sin(alpha * np.pi)
    ang = (1.0 - q) * np.pi * alpha
    val = s * np.cos(ang) / np.sin(ang) - np.cos(alpha * np.pi)
    return val if val.ndim else float(val)


def sample_ml_scalar(alpha: float, delta: float, rng: RandomStream, size=None):
    """Draw from the scalar ML law with survival E_{alpha,1}(-(x/delta)^alpha).

    X = delta * Z * R^(1/alpha) with Z unit exponential and R drawn by
    quantile inversion. alpha = 1 reduces to delta * Z (exponential law); in
    that case only the exponential variate is consumed.
    """
    alpha = _check_alpha(alpha)
    delta = float(delta)
    if not np.isfinite(delta) or delta <= 0.0:
        raise ValidationError("delta must be positive")
    scalar = size is None
    n = 1 if scalar else int(size)
    if n < 0:
        raise ValidationError("size must be nonnegative")
    g = rng.generator
    z = g.standard_exponential(n)
    if alpha == 1.0:
        out = delta * z
        return float(out[0]) if scalar else out
    u = g.random(n)
    rmix = ml_mixing_quantile(alpha, u)
    out = delta * z * rmix ** (1.0 / alpha)
    return float(out[0]) if scalar else out


def sample_mml(d: MMLDist, rng: RandomStream, size=None):
    """Draw absorption times W^(1/alpha) * S from the product representation.

    W is a phase-type draw and S an independent positive stable variate; the
    two factors use split sub-streams so either marginal is reproducible on
    its own.
    """
    if not isinstance(d, MMLDist):
        raise ValidationError("expected an MMLDist")
    w_stream, s_stream = rng.split(2)
    w = ph_sample(d.ph, w_stream, size)
    s = sample_positive_stable(d.alpha, s_stream, size)
    return w ** (1.0 / d.alpha) * s


def sample_pmml(d: PMMLDist, rng: RandomStream, size=None):
    """Draw from a power-MML law: sample_mml(base)^(1/nu)."""
    if isinstance(d, MMLDist):
        return sample_mml(d, rng, size)
    if not isinstance(d, PMMLDist):
        raise ValidationError("expected a PMMLDist")
    x = sample_mml(d.base, rng, size)
    return x ** (1.0 / d.nu)
