"""Fixed-representation bandit algorithms over a shared ridge state.

Every algorithm reads one :class:`~banditsrl.linalg.RlsState` and picks an
action for the current context; reward updates go straight to the state via
``RlsState.update``.  Randomized choosers consume their generator in a fixed
documented order so that runs can be replayed draw for draw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np

ALGO_KINDS = ("linucb", "eps_greedy", "lints", "igw", "leader")

# JSON spells the ridge weight "lambda"; the dataclass field cannot.
_JSON_ALIASES = {"lambda": "lam"}


class AlgoError(ValueError):
    """Invalid algorithm configuration or state."""


@dataclass(frozen=True)
class AlgoConfig:
    """Parameters shared by the base algorithms.

    ``alpha_ucb`` rescales the LinUCB bonus, ``eps_exponent`` sets the
    eps-greedy schedule eps_t = t**-eps_exponent, and the ``igw_*``
    fields control the inverse-gap-weighted sampler.  ``igw_refit``
    keeps the reward model refreshed every step; switching it off tells
    the caller to refresh the estimate only at geometric checkpoints.
    """

    kind: str = "linucb"
    delta: float = 0.01
    sigma: float = 0.3
    lam: float = 1.0
    alpha_ucb: float = 1.0
    eps_exponent: float = 1.0 / 3.0
    igw_gamma1: float = 10.0
    igw_gamma2: float = 0.5
    igw_refit: bool = True

    def __post_init__(self):
        if self.kind not in ALGO_KINDS:
            raise AlgoError(f"unknown algorithm kind {self.kind!r}")
        if not 0.0 < self.delta < 1.0:
            raise AlgoError(f"delta must lie in (0, 1), got {self.delta}")
        if not self.lam > 0.0:
            raise AlgoError(f"lambda must be positive, got {self.lam}")
        if not 0.0 < self.eps_exponent <= 1.0:
            raise AlgoError(
                f"eps_exponent must lie in (0, 1], got {self.eps_exponent}")
        if self.sigma < 0.0 or not math.isfinite(self.sigma):
            raise AlgoError(f"sigma must be nonnegative, got {self.sigma}")
        if self.igw_gamma1 < 0.0:
            raise AlgoError(f"igw_gamma1 must be nonnegative, got {self.igw_gamma1}")

    @classmethod
    def from_dict(cls, payload):
        known = {f.name for f in fields(cls)} - {"lam"}
        known |= set(_JSON_ALIASES)
        extra = set(payload) - known
        if extra:
            raise AlgoError(f"unknown algorithm config keys: {sorted(extra)}")
        kwargs = {_JSON_ALIASES.get(k, k): v for k, v in payload.items()}
        return cls(**kwargs)

    def to_dict(self):
        out = {}
        for f in fields(self):
            key = "lambda" if f.name == "lam" else f.name
            out[key] = getattr(self, f.name)
        return out

    def with_kind(self, kind):
        return replace(self, kind=kind)


def beta_threshold(t, d_phi, l_phi, b_phi, lam, sigma, delta):
    """Confidence width for a d_phi-dimensional map after t pulls.

    sigma * sqrt(2 log(1/delta) + d log(1 + t L^2 / (lam d))) + sqrt(lam) B.
    Nondecreasing in t.
    """
    if t < 0:
        raise AlgoError(f"t must be nonnegative, got {t}")
    if not 0.0 < delta < 1.0:
        raise AlgoError(f"delta must lie in (0, 1), got {delta}")
    radius = 2.0 * math.log(1.0 / delta) + d_phi * math.log(
        1.0 + t * l_phi * l_phi / (lam * d_phi))
    return sigma * math.sqrt(radius) + math.sqrt(lam) * b_phi


def ucb_width(rls, cfg, b_phi, delta=None):
    """Bonus multiplier alpha * sigma * sqrt(log(det V / det lam I) +
    2 log(1/delta)) + sqrt(lam) B, with the determinant ratio evaluated
    in log space so long horizons cannot overflow."""
    if delta is None:
        delta = cfg.delta
    sign, logdet = np.linalg.slogdet(rls.V.a)
    if sign <= 0:
        raise AlgoError("design matrix is not positive definite")
    radius = logdet - rls.dim * math.log(rls.lam) + 2.0 * math.log(1.0 / delta)
    return cfg.alpha_ucb * cfg.sigma * math.sqrt(max(radius, 0.0)) + \
        math.sqrt(rls.lam) * b_phi


def ucb_scores(x, rep, rls, cfg, delta=None):
    """Optimistic value of every action in context x."""
    if rls.dim != rep.d:
        raise AlgoError(
            f"state dimension {rls.dim} does not match rep {rep.id!r} ({rep.d})")
    feats = rep.features[x]
    width = ucb_width(rls, cfg, rep.B, delta=delta)
    bonus = np.sqrt(np.maximum(
        np.einsum("ai,ij,aj->a", feats, rls.Vinv.a, feats), 0.0))
    return feats @ rls.theta + width * bonus


def linucb_choose(x, rep, rls, cfg):
    """Optimistic action; ties go to the lowest index."""
    return int(np.argmax(ucb_scores(x, rep, rls, cfg)))


def eps_greedy_choose(x, rep, rls, cfg, t, rng):
    """Uniform action with probability t**-eps_exponent, else greedy.

    Consumes one uniform for the explore decision and, only when
    exploring, one integer draw.
    """
    if t < 1:
        raise AlgoError(f"t must be at least 1, got {t}")
    n_actions = rep.features.shape[1]
    eps = float(t) ** (-cfg.eps_exponent)
    if rng.random() < eps:
        return int(rng.integers(n_actions))
    return int(np.argmax(rep.features[x] @ rls.theta))


def lints_sample_theta(rls, cfg, b_phi, rng, delta=None):
    """Posterior-style parameter draw N(theta, C^2 V^-1).

    Consumes one standard-normal vector.  The covariance factor is a
    lower-triangular Cholesky of V^-1; failure is surfaced because the
    design matrix is positive definite whenever lam > 0.
    """
    width = ucb_width(rls, cfg, b_phi, delta=delta)
    z = rng.standard_normal(rls.dim)
    if width == 0.0:
        return rls.theta.copy()
    try:
        root = np.linalg.cholesky(rls.Vinv.a)
    except np.linalg.LinAlgError as err:
        raise AlgoError(f"covariance factorization failed: {err}") from err
    return rls.theta + width * (root @ z)


def lints_choose(x, rep, rls, cfg, rng):
    """Greedy action under a randomized parameter draw."""
    if rls.dim != rep.d:
        raise AlgoError(
            f"state dimension {rls.dim} does not match rep {rep.id!r} ({rep.d})")
    theta = lints_sample_theta(rls, cfg, rep.B, rng)
    return int(np.argmax(rep.features[x] @ theta))


def igw_probabilities(x, rep, rls, cfg, t, theta=None):
    """Inverse-gap-weighted action distribution at time t.

    Non-greedy arms get 1 / (A + gamma1 t^gamma2 * gap); the greedy arm
    absorbs the residual mass, which is always at least 1/A.
    """
    if t < 1:
        raise AlgoError(f"t must be at least 1, got {t}")
    if theta is None:
        theta = rls.theta
    values = rep.features[x] @ theta
    n_actions = values.shape[0]
    greedy = int(np.argmax(values))
    gaps = values[greedy] - values
    scale = cfg.igw_gamma1 * float(t) ** cfg.igw_gamma2
    probs = 1.0 / (n_actions + scale * gaps)
    probs[greedy] = 0.0
    probs[greedy] = 1.0 - float(np.sum(probs))
    if float(np.min(probs)) < 0.0:
        raise AlgoError("inverse-gap weights produced a negative probability")
    if abs(float(np.sum(probs)) - 1.0) > 1e-12:
        raise AlgoError("inverse-gap weights do not sum to one")
    return probs, greedy


def igw_choose(x, rep, rls, cfg, t, rng, theta=None):
    """Sample from the inverse-gap-weighted distribution.

    Consumes one uniform, mapped through the distribution's CDF.
    """
    probs, _ = igw_probabilities(x, rep, rls, cfg, t, theta=theta)
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    return int(np.searchsorted(cdf, rng.random(), side="right"))


def leader_choose(x, reps, rls_per_rep, cfg):
    """Most optimistic action under the most pessimistic active map.

    Maximizes over actions the minimum over active representations of
    the optimistic score, each width taken at delta / (number of maps)
    so the union over maps keeps the stated confidence.
    """
    if not reps:
        raise AlgoError("leader needs at least one representation")
    if len(reps) != len(rls_per_rep):
        raise AlgoError("one state per representation required")
    delta = cfg.delta / len(reps)
    floor = None
    for rep, rls in zip(reps, rls_per_rep):
        scores = ucb_scores(x, rep, rls, cfg, delta=delta)
        floor = scores if floor is None else np.minimum(floor, scores)
    return int(np.argmax(floor))


def choose(x, rep, rls, cfg, t, rng):
    """Dispatch to the configured single-representation chooser."""
    if cfg.kind == "linucb":
        return linucb_choose(x, rep, rls, cfg)
    if cfg.kind == "eps_greedy":
        return eps_greedy_choose(x, rep, rls, cfg, t, rng)
    if cfg.kind == "lints":
        return lints_choose(x, rep, rls, cfg, rng)
    if cfg.kind == "igw":
        return igw_choose(x, rep, rls, cfg, t, rng)
    raise AlgoError(f"kind {cfg.kind!r} has no single-representation chooser")
