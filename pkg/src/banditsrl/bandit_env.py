"""Finite contextual linear bandit instances and benchmark generators.

An instance is a finite context set with a categorical context law, a
finite action set, a mean-reward table, Gaussian reward noise, and a
family of feature maps ("representations"), some of which realize the
mean reward exactly and some of which cannot.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import constrained_ls_gram, min_eigenvalue

__all__ = [
    "GenerationError",
    "ValidationError",
    "Representation",
    "SpectralReport",
    "BanditInstance",
    "analyze_representation",
    "make_varying_dimension",
    "make_weak_hls",
    "make_mixing",
    "build_benchmark",
    "BENCHMARKS",
]

# Spectral thresholds.  An eigenvalue below _SPECTRAL_EPS counts as zero
# when classifying a representation; _NONRED_FLOOR is the minimum
# eigenvalue required of the all-actions second-moment matrix of a
# realizable representation.
_SPECTRAL_EPS = 1e-9
_NONRED_FLOOR = 1e-6

# Mean-reward design: per context the optimal value, the gap to the
# runner-up, and the floor for the remaining arms.  Keeping every mean
# inside a narrow positive band makes the reward table hard to fit for
# feature maps that do not realize it, under any action choice, which is
# what drives model elimination at desk-scale horizons.
_MU_OPT = (0.90, 0.95)
_MU_GAP = (0.25, 0.30)
_MU_LOW = 0.60

# Generator acceptance floors, checked by resampling.  The 1e-3 floor is
# the definitional misspecification requirement; the stronger floor keeps
# elimination visible within short horizons (the model-selection slack at
# the last power-of-two boundary under 3e4 steps is ~0.17, so fit gaps
# must clear it with margin).  Any mean table from the band design admits
# gaps up to ~0.36 under arbitrarily shrunk features, so 0.25 is always
# reachable.
_MISFIT_FLOOR = 1e-3
_MISFIT_TARGET = 0.25
_HLS_FLOOR = 0.25

# The solved coordinate stays well-scaled only when the matching parameter
# entry is large; a small entry inflates feature norms, which in turn
# inflates confidence widths and defers the greedy gate past short horizons.
# Clipping the raw coordinate draws bounds the worst-case feature norm for
# the same reason.  Features and parameter are then jointly rescaled
# (keeping L·B and all predictions fixed) so the declared ball radius, and
# with it the additive √λ·B confidence term, shrinks.
_THETA_LAST_RANGE = (0.80, 0.95)
_NOISE_CLIP = 2.0
_REP_SCALE = 2.0

# Degraded maps get extra mass along the suppressed direction on their
# suboptimal arms.  This widens the spectral separation between full-span
# and suppressed maps under both selection losses without touching the
# optimal-arm spectrum.
_UBOOST = (1.5, 3.0)

# Misspecified maps receive a few large-norm outlier features.  Selection
# losses are normalized by the squared maximum feature norm, so outliers
# deflate a map's score without changing its fit, keeping spectral
# selection pointed at full-span maps even before elimination.
_SPIKE_COUNT = 10
_SPIKE_SCALE = 5.0

# Starved-tie design.  Half the contexts carry one arm trailing the best
# by a whisker, and only those arms load coordinate 5, so every optimal
# feature is orthogonal to it.  The parameter weight on that coordinate
# cancels most of the tie arm's margin: an estimator that has never
# sampled the tie direction sees a comfortable gap of tie + hidden, and
# the apparent margin collapses toward the true tie gap exactly as fast
# as the direction gets sampled.  Greedy play therefore stays correct
# while certification at the tie contexts needs on the order of
# (beta/tie)^2 samples of a direction that only tie pulls feed.  The
# far arms price uniform exploration at those same contexts.
_NOHLS_DIMS = (6, 6, 7, 8, 9, 10)
_NOHLS_IDS = ("real-d6a", "real-d6b", "real-d7", "real-d8", "real-d9",
              "real-d10")
_NOHLS_HARD_FRAC = 0.5
_NOHLS_OPT = (0.85, 0.95)
_NOHLS_TIE_GAP = (0.05, 0.08)
_NOHLS_FAR_GAP = (0.70, 0.90)
_NOHLS_EASY_GAP = (0.45, 0.60)
_NOHLS_HIDDEN_WEIGHT = 0.25
_NOHLS_TIE_LEAN = (0.8, 1.2)

_REP_ATTEMPTS = 500
_INSTANCE_ATTEMPTS = 50


class GenerationError(RuntimeError):
    """A generator exhausted its resampling budget."""


class ValidationError(ValueError):
    """An instance or representation violates a structural requirement."""


@dataclass(eq=False)
class Representation:
    """One feature map phi: (context, action) -> R^d.

    ``features`` has shape (n_contexts, n_actions, d).  ``L`` is always
    the realized maximum feature norm; ``B`` is the radius of the
    admissible parameter ball.
    """

    id: str
    features: np.ndarray
    B: float = 1.0
    L: float = field(init=False)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        if self.features.ndim != 3:
            raise ValidationError(
                f"rep {self.id!r}: features must be (contexts, actions, d), "
                f"got shape {self.features.shape}")
        if not np.all(np.isfinite(self.features)):
            raise ValidationError(f"rep {self.id!r}: non-finite features")
        if not (self.B > 0 and math.isfinite(self.B)):
            raise ValidationError(f"rep {self.id!r}: B must be positive")
        self.L = float(np.max(np.linalg.norm(self.features, axis=2)))
        if self.L <= 0:
            raise ValidationError(f"rep {self.id!r}: all features are zero")

    @property
    def d(self):
        return self.features.shape[2]

    def phi(self, x, a):
        return self.features[x, a]


@dataclass
class SpectralReport:
    """Spectral and fit diagnostics for one representation."""

    rep_id: str
    lambda_star: float
    is_hls: bool
    is_weak_hls: bool
    fit_error: float
    eps_phi: float

    def to_dict(self):
        return {
            "rep_id": self.rep_id,
            "lambda_star": self.lambda_star,
            "is_hls": self.is_hls,
            "is_weak_hls": self.is_weak_hls,
            "fit_error": self.fit_error,
            "eps_phi": self.eps_phi,
        }


@dataclass(eq=False)
class BanditInstance:
    """Finite stochastic contextual bandit with several feature maps."""

    contexts: int
    actions: int
    rho: np.ndarray
    mu: np.ndarray
    sigma: float
    reps: list
    star_ids: list
    meta: dict = field(default_factory=dict)
    theta_star: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        self.mu = np.asarray(self.mu, dtype=float)
        self.validate()
        self.opt_actions = np.argmax(self.mu, axis=1)
        self.gaps = self.mu[np.arange(self.contexts), self.opt_actions][:, None] - self.mu
        self.min_gap = float(np.min(self.gaps[self.gaps > 0])) if self.actions > 1 else math.inf
        self._rho_cum = np.cumsum(self.rho)
        self._rho_cum[-1] = 1.0

    def validate(self):
        X, A = self.contexts, self.actions
        if X < 1 or A < 1:
            raise ValidationError("need at least one context and one action")
        if self.rho.shape != (X,) or np.any(self.rho < 0):
            raise ValidationError("rho must be a nonnegative vector over contexts")
        if abs(float(self.rho.sum()) - 1.0) > 1e-9:
            raise ValidationError(f"rho sums to {self.rho.sum()}, expected 1")
        if self.mu.shape != (X, A):
            raise ValidationError(f"mu has shape {self.mu.shape}, expected {(X, A)}")
        if not np.all(np.isfinite(self.mu)) or float(np.max(np.abs(self.mu))) > 1.0 + 1e-12:
            raise ValidationError("mean rewards must be finite with |mu| <= 1")
        if A > 1:
            top2 = np.partition(self.mu, A - 2, axis=1)[:, -2:]
            if np.any(top2[:, 1] - top2[:, 0] <= 0):
                raise ValidationError("every context needs a unique optimal action")
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise ValidationError("sigma must be nonnegative and finite")
        ids = [r.id for r in self.reps]
        if len(ids) != len(set(ids)) or not ids:
            raise ValidationError("representation ids must be unique and nonempty")
        for r in self.reps:
            if r.features.shape[:2] != (X, A):
                raise ValidationError(
                    f"rep {r.id!r} features shaped {r.features.shape[:2]}, "
                    f"expected {(X, A)}")
        if not self.star_ids or not set(self.star_ids) <= set(ids):
            raise ValidationError("star_ids must be a nonempty subset of rep ids")
        for rid in self.star_ids:
            rep = self.rep(rid)
            theta, resid = _lstsq_fit(rep.features, self.mu)
            if resid > 1e-6:
                raise ValidationError(
                    f"star rep {rid!r} does not realize mu (max residual {resid:.3e})")
            if float(np.linalg.norm(theta)) > rep.B * (1 + 1e-6):
                raise ValidationError(f"star rep {rid!r} parameter exceeds its ball")

    def rep(self, rep_id):
        for r in self.reps:
            if r.id == rep_id:
                return r
        raise KeyError(rep_id)

    def rep_index(self, rep_id):
        for i, r in enumerate(self.reps):
            if r.id == rep_id:
                return i
        raise KeyError(rep_id)

    def sample_context(self, rng, size=None):
        """Draw context indices from rho by inverse CDF."""
        if size is None:
            return int(np.searchsorted(self._rho_cum, rng.random(), side="right"))
        return np.searchsorted(self._rho_cum, rng.random(size), side="right").astype(np.int64)

    def step(self, x, a, rng):
        """Reward for playing action ``a`` in context ``x``."""
        if not (0 <= x < self.contexts and 0 <= a < self.actions):
            raise ValidationError(f"step({x}, {a}) out of range")
        mean = float(self.mu[x, a])
        if self.sigma == 0.0:
            return mean
        return mean + self.sigma * float(rng.standard_normal())

    def to_dict(self):
        return {
            "contexts": self.contexts,
            "actions": self.actions,
            "rho": [float(v) for v in self.rho],
            "mu": [[float(v) for v in row] for row in self.mu],
            "sigma": self.sigma,
            "reps": [{
                "id": r.id,
                "d": r.d,
                "features": [float(v) for v in r.features.ravel()],
                "L": r.L,
                "B": r.B,
            } for r in self.reps],
            "star_ids": list(self.star_ids),
            "meta": dict(self.meta),
        }

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def from_dict(cls, payload):
        known = {"contexts", "actions", "rho", "mu", "sigma", "reps",
                 "star_ids", "meta"}
        extra = set(payload) - known
        if extra:
            raise ValidationError(f"unknown instance keys: {sorted(extra)}")
        X = int(payload["contexts"])
        A = int(payload["actions"])
        reps = []
        for spec in payload["reps"]:
            feats = np.asarray(spec["features"], dtype=float)
            d = int(spec["d"])
            if feats.size != X * A * d:
                raise ValidationError(
                    f"rep {spec.get('id')!r}: {feats.size} feature values, "
                    f"expected {X * A * d}")
            rep = Representation(str(spec["id"]), feats.reshape(X, A, d),
                                 B=float(spec["B"]))
            if abs(rep.L - float(spec["L"])) > 1e-10 * max(1.0, rep.L):
                raise ValidationError(
                    f"rep {rep.id!r}: stored L={spec['L']} but realized "
                    f"max norm is {rep.L}")
            reps.append(rep)
        inst = cls(contexts=X, actions=A,
                   rho=np.asarray(payload["rho"], dtype=float),
                   mu=np.asarray(payload["mu"], dtype=float),
                   sigma=float(payload["sigma"]),
                   reps=reps,
                   star_ids=[str(s) for s in payload["star_ids"]],
                   meta=dict(payload.get("meta", {})))
        for rid in inst.star_ids:
            theta, _ = _lstsq_fit(inst.rep(rid).features, inst.mu)
            inst.theta_star[rid] = theta
        return inst

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _lstsq_fit(features, mu):
    """Unconstrained least squares of mu on features; returns (theta, max residual)."""
    X, A, d = features.shape
    flat = features.reshape(X * A, d)
    theta, *_ = np.linalg.lstsq(flat, mu.ravel(), rcond=None)
    resid = float(np.max(np.abs(flat @ theta - mu.ravel())))
    return theta, resid


# ---------------------------------------------------------------------------
# Spectral analysis


def _opt_second_moment(rho, features, opt_actions):
    opt_feats = features[np.arange(len(opt_actions)), opt_actions]
    return np.einsum("x,xi,xj->ij", rho, opt_feats, opt_feats)


def _policy_fit_error(rho, mu, features, bound, policy):
    """Weighted squared fit error of mu under a fixed policy, theta in the ball."""
    X = len(policy)
    rows = features[np.arange(X), policy]
    targets = mu[np.arange(X), policy]
    gram = np.einsum("x,xi,xj->ij", rho, rows, rows)
    gram = 0.5 * (gram + gram.T)
    b = (rho * targets) @ rows
    sum_y2 = float(rho @ (targets * targets))
    theta, err = constrained_ls_gram(gram, b, sum_y2, 1, bound, lam0=1e-10)
    return theta, err


def _alternating_fit(rho, mu, features, bound, policy0):
    """Alternate exact policy improvement with ball-constrained refits."""
    policy = policy0.copy()
    best = math.inf
    for _ in range(100):
        theta, _ = _policy_fit_error(rho, mu, features, bound, policy)
        preds = features @ theta
        sq = (preds - mu) ** 2
        policy = np.argmin(sq, axis=1)
        value = float(rho @ sq[np.arange(len(policy)), policy])
        if best - value <= 1e-12 * max(1.0, best):
            best = min(best, value)
            break
        best = value
    return max(best, 0.0)


def fit_error(rho, mu, features, bound, opt_actions=None):
    """Smallest weighted MSE of mu over policies and theta in the ball.

    Alternating minimization from two starts: the all-zero parameter
    (which picks the per-context action closest to zero) and, when
    available, the optimal policy.  The smaller local value is reported.
    """
    X, A, _ = features.shape
    zero_policy = np.argmin(mu ** 2, axis=1)
    val = _alternating_fit(rho, mu, features, bound, zero_policy)
    if opt_actions is not None:
        val = min(val, _alternating_fit(rho, mu, features, bound,
                                        np.asarray(opt_actions)))
    return val


def analyze_representation(instance, rep):
    """Spectral classification and misspecification level of one rep."""
    mstar = _opt_second_moment(instance.rho, rep.features, instance.opt_actions)
    lambda_star = min_eigenvalue(0.5 * (mstar + mstar.T))
    is_hls = lambda_star > _SPECTRAL_EPS

    flat = rep.features.reshape(-1, rep.d)
    norms2 = np.einsum("ij,ij->i", flat, flat)
    quad = np.einsum("ij,jk,ik->i", flat, mstar, flat)
    nz = norms2 > 0
    if np.any(nz):
        is_weak = bool(np.min(quad[nz] / norms2[nz]) > _SPECTRAL_EPS)
    else:
        is_weak = False

    err = fit_error(instance.rho, instance.mu, rep.features, rep.B,
                    instance.opt_actions)
    eps_phi = err if err > _SPECTRAL_EPS else 0.0
    return SpectralReport(rep_id=rep.id, lambda_star=float(lambda_star),
                          is_hls=is_hls, is_weak_hls=is_weak,
                          fit_error=float(err), eps_phi=float(eps_phi))


# ---------------------------------------------------------------------------
# Generators


def _make_mu(rng, n_contexts, n_actions):
    """Mean-reward table with a unique best arm and a healthy gap everywhere."""
    X, A = n_contexts, n_actions
    v_opt = rng.uniform(*_MU_OPT, size=X)
    if A == 1:
        return v_opt[:, None]
    gap = rng.uniform(*_MU_GAP, size=X)
    v_second = v_opt - gap
    vals = np.empty((X, A))
    vals[:, 0] = v_opt
    vals[:, 1] = v_second
    if A > 2:
        vals[:, 2:] = rng.uniform(_MU_LOW, v_second[:, None], size=(X, A - 2))
    # Random arm order per context, via a uniform-key shuffle.
    order = np.argsort(rng.random((X, A)), axis=1)
    return np.take_along_axis(vals, order, axis=1)


def _unit(rng, d):
    while True:
        v = rng.standard_normal(d)
        n = np.linalg.norm(v)
        if n > 1e-8:
            return v / n


def _theta_for_solve(rng, d):
    """Unit parameter whose last coordinate lands in a fixed band."""
    if d == 1:
        return np.array([1.0 if rng.random() < 0.5 else -1.0])
    lo, hi = _THETA_LAST_RANGE
    last = rng.uniform(lo, hi) * (1.0 if rng.random() < 0.5 else -1.0)
    head = _unit(rng, d - 1) * math.sqrt(1.0 - last * last)
    return np.concatenate([head, [last]])


def _solve_last_coord(features, theta, mu):
    """Set the last feature coordinate so that phi @ theta == mu exactly."""
    d = theta.shape[0]
    partial = features[..., :d - 1] @ theta[:d - 1] if d > 1 else 0.0
    features[..., d - 1] = (mu - partial) / theta[d - 1]


def _nonredundancy(rho, features):
    X, A, d = features.shape
    second = np.einsum("x,xai,xaj->ij", rho / A, features, features)
    return min_eigenvalue(0.5 * (second + second.T))


def _realizable_rep(rng, rho, mu, opt_actions, d, rep_id, hls):
    """Representation realizing mu exactly; HLS or not according to ``hls``.

    Non-HLS variants zero the optimal-arm features along one random
    direction orthogonal to the solved coordinate, then re-solve, which
    makes the optimal-arm second moment exactly singular while leaving
    realizability intact.
    """
    for _ in range(_REP_ATTEMPTS):
        theta = _theta_for_solve(rng, d)
        feats = np.zeros((mu.shape[0], mu.shape[1], d))
        if d > 1:
            draws = rng.standard_normal((mu.shape[0], mu.shape[1], d - 1))
            feats[..., :d - 1] = np.clip(draws, -_NOISE_CLIP, _NOISE_CLIP)
        if not hls:
            if d < 2:
                raise GenerationError("cannot suppress the optimal span in d=1")
            u = _unit(rng, d - 1)
            rows = np.arange(mu.shape[0])
            opt = feats[rows, opt_actions, :d - 1]
            feats[rows, opt_actions, :d - 1] = opt - np.outer(opt @ u, u)
            # Suboptimal arms lean into the suppressed direction.
            boost = rng.uniform(*_UBOOST, size=mu.shape)
            boost *= np.where(rng.random(mu.shape) < 0.5, 1.0, -1.0)
            boost[rows, opt_actions] = 0.0
            feats[..., :d - 1] += boost[..., None] * u
        _solve_last_coord(feats, theta, mu)
        feats *= _REP_SCALE
        theta = theta / _REP_SCALE
        rep = Representation(rep_id, feats, B=float(np.linalg.norm(theta)))
        if _nonredundancy(rho, feats) <= _NONRED_FLOOR:
            continue
        mstar = _opt_second_moment(rho, feats, opt_actions)
        lam_star = min_eigenvalue(0.5 * (mstar + mstar.T))
        if hls and lam_star < _HLS_FLOOR:
            continue
        if not hls and lam_star > _SPECTRAL_EPS:
            continue
        return rep, theta
    raise GenerationError(f"resampling budget exhausted for rep {rep_id!r}")


def _misspec_ok(rho, mu, opt_actions, feats, bound):
    err = fit_error(rho, mu, feats, bound, opt_actions)
    if err <= max(_MISFIT_FLOOR, _MISFIT_TARGET):
        return False
    _, opt_err = _policy_fit_error(rho, mu, feats, bound, np.asarray(opt_actions))
    return opt_err > _MISFIT_TARGET


def _spike(rng, feats):
    """Scale a handful of features up, inflating the map's norm bound."""
    X, A, _ = feats.shape
    idx = rng.choice(X * A, size=min(_SPIKE_COUNT, X * A), replace=False)
    flat = feats.reshape(X * A, -1)
    flat[idx] *= _SPIKE_SCALE
    return feats


def _shrink_until_misspec(feats, rho, mu, opt_actions, steps=24):
    """Scale features down until the parameter ball can no longer fit mu.

    Returns the scaled features, or None if even heavy shrinking leaves
    the map an acceptable fit (which would defeat its purpose).
    """
    for _ in range(steps):
        if _misspec_ok(rho, mu, opt_actions, feats, 1.0):
            return feats
        feats = 0.8 * feats
    return None


def _random_rep(rng, rho, mu, opt_actions, d, rep_id):
    # High-dimensional maps can fit the reward table too flexibly; when
    # rejection alone stalls, shrinking the feature scale makes the
    # parameter ball binding and the map verifiably misspecified.
    for attempt in range(_REP_ATTEMPTS):
        scale = 0.8 ** (attempt // 25)
        feats = _spike(rng, scale * rng.standard_normal(
            (mu.shape[0], mu.shape[1], d)))
        if _misspec_ok(rho, mu, opt_actions, feats, 1.0):
            return Representation(rep_id, feats, B=1.0)
    raise GenerationError(f"resampling budget exhausted for rep {rep_id!r}")


def _make_vardim(seed, sigma, n_contexts, n_actions, include_misspec,
                 rng_tag):
    rng = np.random.default_rng(np.random.SeedSequence([seed, rng_tag]))
    last_err = None
    for _ in range(_INSTANCE_ATTEMPTS):
        try:
            mu = _make_mu(rng, n_contexts, n_actions)
            rho = np.full(n_contexts, 1.0 / n_contexts)
            opt_actions = np.argmax(mu, axis=1)
            reps, thetas = [], {}
            for d in (2, 3, 4, 5, 6):
                rep, theta = _realizable_rep(rng, rho, mu, opt_actions, d,
                                             f"real-d{d}", hls=False)
                reps.append(rep)
                thetas[rep.id] = theta
            hls_rep, hls_theta = _realizable_rep(
                rng, rho, mu, opt_actions, 6, "real-d6-hls", hls=True)
            if include_misspec:
                mother = hls_rep.features
                for k, name in ((3, "mis-half-d3"), (2, "mis-third-d2")):
                    feats = _shrink_until_misspec(
                        _spike(rng, mother[..., :k].copy()), rho, mu, opt_actions)
                    if feats is None:
                        raise GenerationError(f"subset rep {name!r} fits too well")
                    reps.append(Representation(name, feats, B=1.0))
                for d, name in ((3, "mis-rand-d3"), (9, "mis-rand-d9"),
                                (12, "mis-rand-d12a"), (12, "mis-rand-d12b"),
                                (18, "mis-rand-d18")):
                    reps.append(_random_rep(rng, rho, mu, opt_actions, d, name))
            # The HLS candidate goes last among the realizable block so index
            # ties never favor it.
            reps.insert(5, hls_rep)
            thetas[hls_rep.id] = hls_theta
            star = [f"real-d{d}" for d in (2, 3, 4, 5, 6)] + ["real-d6-hls"]
            inst = BanditInstance(
                contexts=n_contexts, actions=n_actions, rho=rho, mu=mu,
                sigma=sigma, reps=reps, star_ids=star,
                meta={"hls_id": "real-d6-hls"},
                theta_star=thetas)
            return inst
        except GenerationError as err:
            last_err = err
    raise GenerationError(f"instance generation failed: {last_err}")


def make_varying_dimension(seed, sigma=0.3, n_contexts=100, n_actions=5):
    """Thirteen representations: six realizable (dims 2..6, exactly one
    six-dimensional one with full optimal-arm span), two feature subsets
    of that rep, and five random maps of dims 3, 9, 12, 12, 18."""
    return _make_vardim(seed, sigma, n_contexts, n_actions,
                        include_misspec=True, rng_tag=11)


def _pad_with_ones(instance, width, rep_ids):
    if width == 0:
        return instance
    reps = []
    thetas = dict(instance.theta_star)
    for r in instance.reps:
        if r.id in rep_ids:
            X, A, d = r.features.shape
            feats = np.concatenate(
                [r.features, np.ones((X, A, width))], axis=2)
            reps.append(Representation(r.id, feats, B=r.B))
            if r.id in thetas:
                thetas[r.id] = np.concatenate([thetas[r.id], np.zeros(width)])
        else:
            reps.append(r)
    return BanditInstance(
        contexts=instance.contexts, actions=instance.actions,
        rho=instance.rho, mu=instance.mu, sigma=instance.sigma,
        reps=reps, star_ids=list(instance.star_ids),
        meta=dict(instance.meta), theta_star=thetas)


def make_weak_hls(seed, sigma=0.3, n_contexts=100, n_actions=5, pad_width=5):
    """Varying-dimension instance with every realizable rep padded by
    ``pad_width`` constant-one coordinates.  Padding kills the full-rank
    optimal-arm span (the padded maps span at most d+1 of their d+pad
    dimensions) while the padded full-span rep keeps equal optimal and
    overall spans."""
    inst = make_varying_dimension(seed, sigma, n_contexts, n_actions)
    return _pad_with_ones(inst, pad_width, set(inst.star_ids))


def make_mixing(seed, sigma=0.3, n_contexts=100, n_actions=5, n_reps=6, d=6):
    """Six realizable d=6 maps, each with a different direction removed
    from its optimal-arm span; no single map has full optimal-arm rank
    but a per-context mixture does."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 13]))
    last_err = None
    for _ in range(_INSTANCE_ATTEMPTS):
        try:
            mu = _make_mu(rng, n_contexts, n_actions)
            rho = np.full(n_contexts, 1.0 / n_contexts)
            opt_actions = np.argmax(mu, axis=1)
            reps, thetas = [], {}
            for i in range(n_reps):
                rep, theta = _realizable_rep(rng, rho, mu, opt_actions, d,
                                             f"mix-d{d}-{i}", hls=False)
                reps.append(rep)
                thetas[rep.id] = theta
            lam = _mixture_lambda(rho, reps, opt_actions)
            if lam <= _NONRED_FLOOR:
                raise GenerationError(f"mixture spectrum too small ({lam:.2e})")
            inst = BanditInstance(
                contexts=n_contexts, actions=n_actions, rho=rho, mu=mu,
                sigma=sigma, reps=reps, star_ids=[r.id for r in reps],
                meta={"hls_id": None, "mixture_lambda": float(lam)},
                theta_star=thetas)
            return inst
        except GenerationError as err:
            last_err = err
    raise GenerationError(f"instance generation failed: {last_err}")


def _mixture_lambda(rho, reps, opt_actions):
    """Greedy per-context rep assignment maximizing the pooled optimal-arm
    spectrum; returns the pooled minimum eigenvalue."""
    X = len(opt_actions)
    d = reps[0].d
    rows = np.arange(X)
    opt_feats = np.stack([r.features[rows, opt_actions] for r in reps])  # (R,X,d)
    assign = np.zeros(X, dtype=int)
    pooled = np.einsum("x,xi,xj->ij", rho, opt_feats[0], opt_feats[0])
    for _ in range(2):
        for x in range(X):
            base = pooled - rho[x] * np.outer(opt_feats[assign[x], x],
                                              opt_feats[assign[x], x])
            best_i, best_val = assign[x], -math.inf
            for i in range(len(reps)):
                cand = base + rho[x] * np.outer(opt_feats[i, x], opt_feats[i, x])
                val = min_eigenvalue(0.5 * (cand + cand.T))
                if val > best_val:
                    best_i, best_val = i, val
            assign[x] = best_i
            pooled = base + rho[x] * np.outer(opt_feats[best_i, x],
                                              opt_feats[best_i, x])
    return min_eigenvalue(0.5 * (pooled + pooled.T))


def _make_tie_mu(rng, n_contexts, n_actions):
    """Mean table whose hard half pairs a near-tie arm with far-off rest.

    Returns the table plus the hard-context mask and the post-shuffle
    columns of the optimal and tie arms.
    """
    X, A = n_contexts, n_actions
    if A < 2:
        raise GenerationError("the near-tie construction needs two actions")
    n_hard = int(round(_NOHLS_HARD_FRAC * X))
    hard = np.zeros(X, dtype=bool)
    hard[rng.choice(X, size=n_hard, replace=False)] = True
    v_opt = rng.uniform(*_NOHLS_OPT, size=X)
    gaps = np.zeros((X, A))
    if A > 1:
        gaps[~hard, 1:] = rng.uniform(*_NOHLS_EASY_GAP,
                                      size=(X - n_hard, A - 1))
        gaps[hard, 1] = rng.uniform(*_NOHLS_TIE_GAP, size=n_hard)
    if A > 2:
        gaps[hard, 2:] = rng.uniform(*_NOHLS_FAR_GAP, size=(n_hard, A - 2))
    vals = v_opt[:, None] - gaps
    order = np.argsort(rng.random((X, A)), axis=1)
    mu = np.take_along_axis(vals, order, axis=1)
    opt_slot = np.argmax(order == 0, axis=1)
    tie_slot = np.argmax(order == 1, axis=1)
    return mu, hard, opt_slot, tie_slot


def _starved_tie_rep(rng, rho, mu, hard, tie_slot, d, rep_id):
    """Realizable map whose tie arms alone carry coordinate 5.

    Coordinates 0..3 are generic draws, coordinate 4 is solved for exact
    realizability, coordinate 5 is zero outside the near-tie arms, and
    any further coordinates are inert draws with no parameter weight.
    The optimal-arm second moment is singular along coordinate 5 for
    every such map, while the full action set still spans R^d.
    """
    X, A = mu.shape
    base = 6
    if d < base:
        raise GenerationError(f"rep {rep_id!r}: need at least {base} dims")
    for _ in range(_REP_ATTEMPTS):
        theta = np.zeros(d)
        theta[:base - 1] = _theta_for_solve(rng, base - 1) * math.sqrt(
            1.0 - _NOHLS_HIDDEN_WEIGHT ** 2)
        theta[base - 1] = _NOHLS_HIDDEN_WEIGHT
        feats = np.zeros((X, A, d))
        draws = rng.standard_normal((X, A, base - 2))
        feats[..., :base - 2] = np.clip(draws, -_NOISE_CLIP, _NOISE_CLIP)
        lean = rng.uniform(*_NOHLS_TIE_LEAN, size=int(hard.sum()))
        feats[np.flatnonzero(hard), tie_slot[hard], base - 1] = lean
        if d > base:
            pads = rng.standard_normal((X, A, d - base))
            feats[..., base:] = np.clip(pads, -_NOISE_CLIP, _NOISE_CLIP)
        partial = feats[..., :base - 2] @ theta[:base - 2] \
            + feats[..., base - 1] * theta[base - 1]
        feats[..., base - 2] = (mu - partial) / theta[base - 2]
        feats *= _REP_SCALE
        theta = theta / _REP_SCALE
        rep = Representation(rep_id, feats, B=float(np.linalg.norm(theta)))
        if _nonredundancy(rho, feats) <= _NONRED_FLOOR:
            continue
        mstar = _opt_second_moment(rho, feats, np.argmax(mu, axis=1))
        if min_eigenvalue(0.5 * (mstar + mstar.T)) > _SPECTRAL_EPS:
            continue
        return rep, theta
    raise GenerationError(f"resampling budget exhausted for rep {rep_id!r}")


def make_no_hls(seed, sigma=0.3, n_contexts=100, n_actions=5):
    """Six realizable maps of dims 6..10, none with full optimal-arm span.

    Every map shares the starved-tie geometry: the only access to its
    sixth coordinate runs through near-tie arms that greedy play has no
    reason to take, so uniform exploration is what prices the instance.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, 14]))
    last_err = None
    for _ in range(_INSTANCE_ATTEMPTS):
        try:
            mu, hard, _, tie_slot = _make_tie_mu(rng, n_contexts, n_actions)
            rho = np.full(n_contexts, 1.0 / n_contexts)
            reps, thetas = [], {}
            for rep_id, d in zip(_NOHLS_IDS, _NOHLS_DIMS):
                rep, theta = _starved_tie_rep(rng, rho, mu, hard, tie_slot,
                                              d, rep_id)
                reps.append(rep)
                thetas[rep.id] = theta
            inst = BanditInstance(
                contexts=n_contexts, actions=n_actions, rho=rho, mu=mu,
                sigma=sigma, reps=reps, star_ids=[r.id for r in reps],
                meta={"hls_id": None, "hard_contexts": int(hard.sum())},
                theta_star=thetas)
            return inst
        except GenerationError as err:
            last_err = err
    raise GenerationError(f"instance generation failed: {last_err}")


def _strip(instance, rep_id):
    rep = instance.rep(rep_id)
    return BanditInstance(
        contexts=instance.contexts, actions=instance.actions,
        rho=instance.rho, mu=instance.mu, sigma=instance.sigma,
        reps=[rep], star_ids=[rep_id],
        meta={"hls_id": instance.meta.get("hls_id")
              if rep_id == instance.meta.get("hls_id") else None},
        theta_star={rep_id: instance.theta_star[rep_id]}
        if rep_id in instance.theta_star else {})


BENCHMARKS = (
    "varying_dim",
    "varying_dim_realizable_only",
    "varying_dim_no_hls",
    "weak_hls",
    "mixing",
    "single_rep_hls",
    "single_rep_no_hls",
)


def build_benchmark(name, seed, sigma=0.3, n_contexts=100, n_actions=5):
    """Construct a named benchmark instance deterministically from a seed."""
    if not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ValidationError(f"seed must be a nonnegative integer, got {seed!r}")
    if name == "varying_dim":
        return make_varying_dimension(seed, sigma, n_contexts, n_actions)
    if name == "varying_dim_realizable_only":
        return _make_vardim(seed, sigma, n_contexts, n_actions,
                            include_misspec=False, rng_tag=11)
    if name == "varying_dim_no_hls":
        return make_no_hls(seed, sigma, n_contexts, n_actions)
    if name == "weak_hls":
        return make_weak_hls(seed, sigma, n_contexts, n_actions)
    if name == "mixing":
        return make_mixing(seed, sigma, n_contexts, n_actions)
    if name == "single_rep_hls":
        inst = _make_vardim(seed, sigma, n_contexts, n_actions,
                            include_misspec=False, rng_tag=11)
        return _strip(inst, "real-d6-hls")
    if name == "single_rep_no_hls":
        inst = _make_vardim(seed, sigma, n_contexts, n_actions,
                            include_misspec=False, rng_tag=11)
        return _strip(inst, "real-d6")
    raise ValidationError(f"unknown benchmark {name!r}; known: {BENCHMARKS}")
