"""Phased representation selection around a no-regret base algorithm.

The controller keeps one ridge state per candidate feature map over the
full history.  At geometric phase boundaries it screens maps by their
constrained least-squares error, picks the survivor minimizing a
spectral (or bound-based) loss, and hands the phase to the base
algorithm.  Between boundaries a likelihood-ratio test decides, per
step, whether the active map's greedy action is already provably
optimal; when it is, the step bypasses the base algorithm entirely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from banditsrl.base_algos import beta_threshold, choose
from banditsrl.linalg import (
    RlsState, SymMatrix, constrained_ls_gram, min_eigenvalue)

LOSS_KINDS = ("eig", "weak", "weak_norm", "bic")

# Spectra of rank-deficient designs are zero only up to factorization
# noise; snapping them restores exact ties so index order can break them.
_EIG_ZERO_RTOL = 1e-9


class SrlError(ValueError):
    """Invalid controller configuration or state."""


@dataclass(frozen=True)
class SrlConfig:
    """Controller parameters.

    ``gamma`` spaces the phase boundaries t_{j+1} = ceil(gamma t_j);
    ``alpha_glrt`` rescales the test threshold (0 disables the test);
    ``use_ball_constraint`` switches the screening MSE between the
    ball-constrained solver and the plain ridge solution.
    """

    gamma: float = 2.0
    delta: float = 0.01
    loss: str = "eig"
    alpha_glrt: float = 1.0
    warm_start: bool = True
    reset_on_phase: bool = True
    use_ball_constraint: bool = True

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise SrlError(f"gamma must exceed 1, got {self.gamma}")
        if not 0.0 < self.delta < 1.0:
            raise SrlError(f"delta must lie in (0, 1), got {self.delta}")
        if self.loss not in LOSS_KINDS:
            raise SrlError(f"unknown loss {self.loss!r}; known: {LOSS_KINDS}")
        if self.alpha_glrt < 0.0:
            raise SrlError(f"alpha_glrt must be nonnegative, got {self.alpha_glrt}")

    @classmethod
    def from_dict(cls, payload):
        known = {f.name for f in fields(cls)}
        extra = set(payload) - known
        if extra:
            raise SrlError(f"unknown controller config keys: {sorted(extra)}")
        return cls(**payload)

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class MseRecord:
    """Screening outcome for one representation at one boundary."""

    rep_id: str
    theta_hat: np.ndarray
    mse: float
    alpha: float


def phase_confidence(j, delta):
    """Per-phase confidence delta / (2 (j+1)^2)."""
    return delta / (2.0 * (j + 1) ** 2)


def alpha_threshold(t, d_phi, l_phi, b_phi, n_reps, delta):
    """Screening slack (40/t) log(8 |Phi|^2 (12 L B t)^d t^3 / delta) + 2/t.

    Evaluated in log space; strictly positive, and decreasing in t once
    the 1/t factor dominates the log t growth (t >= 3 in practice).
    """
    if t < 1:
        raise SrlError(f"t must be at least 1, got {t}")
    if not 0.0 < delta <= 1.0:
        raise SrlError(f"delta must lie in (0, 1], got {delta}")
    log_term = (math.log(8.0) + 2.0 * math.log(n_reps)
                + d_phi * math.log(12.0 * l_phi * b_phi * t)
                + 3.0 * math.log(t) - math.log(delta))
    return (40.0 / t) * log_term + 2.0 / t


def _ridge_mse(gram, b, sum_y2, n, theta):
    val = (float(theta @ (gram @ theta)) - 2.0 * float(b @ theta) + sum_y2) / n
    return max(val, 0.0)


def compute_active_set(reps, rep_states, cfg, delta=None):
    """Maps whose best in-ball MSE is within slack of the overall best.

    Returns the surviving ids in dictionary order plus the per-rep
    screening records.  The minimizer of mse + alpha always survives its
    own bound, so the result is never empty.
    """
    if not reps:
        raise SrlError("no representations to screen")
    if delta is None:
        delta = cfg.delta
    t = rep_states[reps[0].id].t
    if t < 1:
        raise SrlError("screening needs at least one observation")
    records = {}
    for rep in reps:
        rls = rep_states[rep.id]
        if rls.t != t:
            raise SrlError(f"rep {rep.id!r} state is at t={rls.t}, expected {t}")
        gram = rls.gram()
        if cfg.use_ball_constraint:
            theta, mse = constrained_ls_gram(gram, rls.b, rls.sum_y2, t, rep.B)
        else:
            theta = rls.theta.copy()
            mse = _ridge_mse(gram, rls.b, rls.sum_y2, t, theta)
        alpha = alpha_threshold(t, rep.d, rep.L, rep.B, len(reps), delta)
        records[rep.id] = MseRecord(rep.id, theta, float(mse), float(alpha))
    bound = min(r.mse + r.alpha for r in records.values())
    survivors = [rep.id for rep in reps if records[rep.id].mse <= bound]
    return survivors, records


def _design_min_eig(v_t, lam):
    g = np.asarray(v_t, dtype=float) - lam * np.eye(np.shape(v_t)[0])
    val = min_eigenvalue(SymMatrix.mirrored(g))
    scale = math.sqrt(float(np.sum(g * g)))
    if abs(val) <= _EIG_ZERO_RTOL * scale:
        return 0.0
    return val


def loss_eig(v_t, lam, l_phi):
    """Negated minimum eigenvalue of the data part of the design matrix,
    normalized by the squared feature-norm bound."""
    return -_design_min_eig(v_t, lam) / (l_phi * l_phi)


def loss_weak(observed, v_t, lam, l_phi, normalized=False):
    """Negated worst quadratic form of observed features in the design.

    ``observed`` holds the played feature rows phi(x_s, a_s).  The
    default divides by the squared norm bound; the normalized variant
    divides each form by its own feature's squared norm and skips
    zero-norm rows.
    """
    observed = np.asarray(observed, dtype=float)
    if observed.ndim != 2 or observed.shape[0] < 1:
        raise SrlError("observed features must be a nonempty (n, d) array")
    g = np.asarray(v_t, dtype=float) - lam * np.eye(observed.shape[1])
    quads = np.einsum("si,ij,sj->s", observed, g, observed)
    if normalized:
        norms2 = np.einsum("si,si->s", observed, observed)
        keep = norms2 > 0.0
        if not np.any(keep):
            return 0.0
        return -float(np.min(quads[keep] / norms2[keep]))
    return -float(np.min(quads)) / (l_phi * l_phi)


def loss_bic(v_t, lam, l_phi, d_phi, t, n_reps, delta, regret_bound,
             subopt_bound):
    """Regret-bound loss with a spectral rebate.

    ``regret_bound(t, d_phi)`` supplies the base algorithm's regret
    bound at the phase confidence; ``subopt_bound`` is the bound on
    suboptimal pulls.  The rebate activates only once the design's
    minimum eigenvalue outgrows its concentration band.
    """
    lam_min = _design_min_eig(v_t, lam)
    band = 8.0 * math.sqrt(t * math.log(4.0 * d_phi * n_reps * t / delta))
    rebate = max(lam_min / (l_phi * l_phi) - subopt_bound - band, 0.0)
    return float(regret_bound(t, d_phi)) - rebate


def linucb_regret_form(t, d_phi, n_reps, delta, gap):
    """Optimism-based bound d^2 log(|Phi| t / delta)^2 / gap."""
    return d_phi * d_phi * math.log(n_reps * t / delta) ** 2 / gap


def eps_greedy_regret_form(t, d_phi, n_actions, n_reps, delta):
    """Forced-exploration bound sqrt(d A) log(|Phi|/delta) t^(2/3)."""
    return math.sqrt(d_phi * n_actions) * math.log(n_reps / delta) * \
        float(t) ** (2.0 / 3.0)


def subopt_pull_form(t, gap, regret_value):
    """Suboptimal-pull bound: the phase-summed regret bound over the gap."""
    return regret_value * math.log2(max(t, 2)) / gap


def select_representation(reps, rep_states, phi_t, cfg, observed_pairs=None,
                          bic_regret_bound=None, bic_subopt_bound=0.0):
    """Loss argmin over the surviving maps; index order breaks ties.

    ``observed_pairs`` is the (contexts, actions) play history needed by
    the weak losses; duplicates are collapsed since the minimum over
    played pairs ignores multiplicity.
    """
    survivors = [rep for rep in reps if rep.id in set(phi_t)]
    if not survivors:
        raise SrlError("no surviving representations to select from")
    if len(survivors) == 1:
        return survivors[0].id

    unique_pairs = None
    if cfg.loss in ("weak", "weak_norm"):
        if observed_pairs is None:
            raise SrlError("weak losses need the play history")
        xs = np.asarray(observed_pairs[0], dtype=np.int64)
        acts = np.asarray(observed_pairs[1], dtype=np.int64)
        if xs.size < 1 or xs.shape != acts.shape:
            raise SrlError("play history must be nonempty and aligned")
        n_actions = survivors[0].features.shape[1]
        codes = np.unique(xs * n_actions + acts)
        unique_pairs = (codes // n_actions, codes % n_actions)
    if cfg.loss == "bic" and bic_regret_bound is None:
        raise SrlError("bic loss needs a regret bound")

    best_id, best_val = None, math.inf
    for rep in survivors:
        rls = rep_states[rep.id]
        t = rls.t
        if cfg.loss == "eig":
            val = loss_eig(rls.V.a, rls.lam, rep.L)
        elif cfg.loss in ("weak", "weak_norm"):
            feats = rep.features[unique_pairs[0], unique_pairs[1]]
            val = loss_weak(feats, rls.V.a, rls.lam, rep.L,
                            normalized=cfg.loss == "weak_norm")
        else:
            val = loss_bic(rls.V.a, rls.lam, rep.L, rep.d, t, len(reps),
                           cfg.delta, bic_regret_bound, bic_subopt_bound)
        if val < best_val:
            best_id, best_val = rep.id, val
    return best_id


def glr_statistic(x, rep, rls):
    """Margin of the greedy arm over its competitors, in test units.

    Minimum over competing arms of (phi_star - phi_a)^T theta divided by
    the V^-1 norm of the difference.  Sentinels: one arm yields +inf; a
    zero-margin competitor yields 0; a zero-norm difference with nonzero
    margin cannot carry evidence and is skipped.
    """
    if rls.dim != rep.d:
        raise SrlError(
            f"state dimension {rls.dim} does not match rep {rep.id!r} ({rep.d})")
    feats = rep.features[x]
    values = feats @ rls.theta
    star = int(np.argmax(values))
    n_actions = values.shape[0]
    if n_actions == 1:
        return math.inf
    diffs = feats[star] - feats
    nums = values[star] - values
    dens2 = np.einsum("ai,ij,aj->a", diffs, rls.Vinv.a, diffs)
    best = math.inf
    for a in range(n_actions):
        if a == star:
            continue
        num = float(nums[a])
        if num == 0.0:
            best = min(best, 0.0)
            continue
        den2 = float(dens2[a])
        if den2 > 0.0:
            best = min(best, num / math.sqrt(den2))
    return best


@dataclass
class SrlState:
    """Mutable per-run controller state.

    ``rep_states`` accumulate every observation; ``base_state`` holds
    only what the base algorithm was fed (its phase data, or the full
    history after a warm start).
    """

    reps: list
    j: int
    t_j: int
    t: int
    active_rep: str
    phi_t: list
    rep_states: dict
    base_state: RlsState
    delta_j: float
    records: dict = field(default_factory=dict)
    history_x: list = field(default_factory=list)
    history_a: list = field(default_factory=list)

    @classmethod
    def fresh(cls, reps, cfg, base_cfg):
        ids = [rep.id for rep in reps]
        if not ids or len(ids) != len(set(ids)):
            raise SrlError("representations must be nonempty with unique ids")
        rep_states = {rep.id: RlsState(rep.d, lam=base_cfg.lam)
                      for rep in reps}
        return cls(reps=list(reps), j=0, t_j=1, t=0, active_rep=ids[0],
                   phi_t=list(ids), rep_states=rep_states,
                   base_state=RlsState(reps[0].d, lam=base_cfg.lam),
                   delta_j=phase_confidence(0, cfg.delta))

    def rep(self, rep_id):
        for r in self.reps:
            if r.id == rep_id:
                return r
        raise KeyError(rep_id)

    def active(self):
        return self.rep(self.active_rep)

    def base_delta(self):
        return self.delta_j / len(self.reps)


def srl_step(state, x, cfg, base_cfg, rng):
    """Pick an action for context x.

    Runs the likelihood-ratio test on the active map's full-history
    state; a passing test plays the greedy action, otherwise the base
    algorithm plays at the phase confidence.
    """
    rep = state.active()
    rls = state.rep_states[state.active_rep]
    glr = glr_statistic(x, rep, rls)
    threshold = cfg.alpha_glrt * beta_threshold(
        state.t, rep.d, rep.L, rep.B, base_cfg.lam, base_cfg.sigma,
        cfg.delta / len(state.reps))
    triggered = cfg.alpha_glrt > 0.0 and glr > threshold
    if triggered:
        action = int(np.argmax(rep.features[x] @ rls.theta))
    else:
        phase_cfg = replace(base_cfg, delta=state.base_delta())
        action = choose(x, rep, state.base_state, phase_cfg, state.t + 1, rng)
    diag = {"glr": glr, "threshold": threshold, "triggered": triggered,
            "rep_id": state.active_rep, "j": state.j,
            "phi_size": len(state.phi_t)}
    return action, diag


def feed_reward(state, x, a, y, triggered):
    """Record one transition: every map's state always, the base
    algorithm's state only when it made the choice."""
    for rep in state.reps:
        state.rep_states[rep.id].update(rep.features[x, a], y)
    if not triggered:
        state.base_state.update(state.active().features[x, a], y)
    state.history_x.append(int(x))
    state.history_a.append(int(a))
    state.t += 1


def srl_phase_boundary(state, cfg, base_cfg, bic_regret_bound=None,
                       bic_subopt_bound=0.0):
    """Process a boundary if one is due; returns whether it fired.

    Fires when t = ceil(gamma t_j) while more than one map is still
    active: advances the phase, rescreens, reselects, and resets the
    base algorithm (warm-started from the new map's full history unless
    disabled).  Once the active set is a singleton the phase schedule
    stops for good; screening never runs again, so the survivor is
    committed.
    """
    if len(state.phi_t) <= 1:
        return False
    if state.t != math.ceil(cfg.gamma * state.t_j):
        return False
    state.j += 1
    state.t_j = state.t
    state.delta_j = phase_confidence(state.j, cfg.delta)
    state.phi_t, state.records = compute_active_set(
        state.reps, state.rep_states, cfg)
    previous = state.active_rep
    state.active_rep = select_representation(
        state.reps, state.rep_states, state.phi_t, cfg,
        observed_pairs=(state.history_x, state.history_a),
        bic_regret_bound=bic_regret_bound,
        bic_subopt_bound=bic_subopt_bound)
    if state.active_rep != previous or cfg.reset_on_phase:
        if cfg.warm_start:
            state.base_state = state.rep_states[state.active_rep].copy()
        else:
            state.base_state = RlsState(state.active().d, lam=base_cfg.lam)
    return True
