"""Teachers: example selection against a virtual learner.

Every teacher here scores a candidate training pair (x, y) by the exact
one-step change it causes in the squared distance between the (virtual)
learner v and the target v*:

    score(x, y) = eta^2 beta^2 ||x||^2 - 2 eta beta <v - v*, x>,

where beta is the loss derivative at the predicted value.  Minimizing the
score over a pool, a synthesis ball, or a span gives the greedy teaching
step; the white-box variant reads the student directly, the black-box
variant reads an exam-maintained estimate.
"""

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .exam import RecoveryConfig, construct_virtual_learner
from .feature_space import SpanMetric, conjugate_apply, project_span
from .learners import loss_grad
from .rng import KEY_SELECT, KEY_VOLUME, substream

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_SYNTH_GRID_POINTS = 2001
_GOLDEN_WIDTH = 1e-10


class TeachingComplete(Exception):
    """The (virtual) learner already sits on the target."""


class DegenerateDirectionError(ValueError):
    """Teaching direction has no component inside the allowed span."""


def default_gamma_grid():
    """41 log-spaced magnitudes in [1e-2, 1e2], both signs."""
    mags = np.logspace(-2.0, 2.0, 41)
    return np.concatenate([-mags[::-1], mags])


@dataclass(frozen=True)
class TeachingMode:
    """What the teacher is allowed to feed the student.

    synthesis: any x with ||x|| <= norm_bound.
    combination: any x in span(candidates) with ||x|| <= norm_bound.
    pool: one of the candidate pairs, as is.
    rescalable_pool: a candidate pair scaled by any gamma in gamma_grid
      (subject to norm_bound when one is set).
    """
    tag: str
    norm_bound: float | None = None
    pool_x: np.ndarray | None = None
    pool_y: np.ndarray | None = None
    gamma_grid: np.ndarray | None = None
    span: SpanMetric | None = None
    pool_norms_sq: np.ndarray | None = None

    @classmethod
    def synthesis(cls, norm_bound):
        if norm_bound <= 0:
            raise ValueError(f"norm_bound must be > 0, got {norm_bound}")
        return cls(tag="synthesis", norm_bound=float(norm_bound))

    @classmethod
    def combination(cls, candidates, norm_bound):
        if norm_bound <= 0:
            raise ValueError(f"norm_bound must be > 0, got {norm_bound}")
        d_mat = np.asarray(candidates, dtype=np.float64)
        if d_mat.ndim != 2:
            raise ValueError("candidates must be a (d, k) matrix of columns")
        return cls(tag="combination", norm_bound=float(norm_bound),
                   span=SpanMetric(d_mat))

    @classmethod
    def pool(cls, pool_x, pool_y, norm_bound=None):
        x, y, norms = cls._check_pool(pool_x, pool_y)
        return cls(tag="pool", pool_x=x, pool_y=y,
                   gamma_grid=np.array([1.0]), norm_bound=norm_bound,
                   pool_norms_sq=norms)

    @classmethod
    def rescalable_pool(cls, pool_x, pool_y, gamma_grid=None,
                        norm_bound=None):
        x, y, norms = cls._check_pool(pool_x, pool_y)
        grid = (default_gamma_grid() if gamma_grid is None
                else np.asarray(gamma_grid, dtype=np.float64))
        if grid.ndim != 1 or grid.size == 0:
            raise ValueError("gamma_grid must be a non-empty 1-D array")
        return cls(tag="rescalable_pool", pool_x=x, pool_y=y,
                   gamma_grid=grid, norm_bound=norm_bound,
                   pool_norms_sq=norms)

    @staticmethod
    def _check_pool(pool_x, pool_y):
        x = np.asarray(pool_x, dtype=np.float64)
        y = np.asarray(pool_y, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] == 0:
            raise ValueError("pool_x must be a non-empty (k, d) matrix")
        if y.shape != (x.shape[0],):
            raise ValueError("pool_y must have one label per pool row")
        return x, y, np.einsum("ij,ij->i", x, x)


@dataclass(frozen=True)
class VirtualLearner:
    """Teacher-side estimate of G^T w with its certified error."""
    v: np.ndarray
    est_error: float
    stale: bool = False

    def __post_init__(self):
        v = np.array(self.v, dtype=np.float64)
        v.setflags(write=False)
        object.__setattr__(self, "v", v)


@dataclass(frozen=True)
class ETCheckReport:
    """Step-size window diagnostic.

    Exponential teachability needs 0 < gamma*beta < 2 (1 - lam) sigma_min
    / (eta sigma_max^2); ``satisfied`` records whether the selected
    example's gamma*beta landed inside that window.
    """
    gamma_beta: float
    upper_bound: float
    lam: float
    satisfied: bool


@dataclass(frozen=True)
class SelectedExample:
    """A teaching pair as fed to the student (x already rescaled)."""
    x: np.ndarray
    y: float
    gamma: float
    objective: float
    index: int | None = None
    et: ETCheckReport | None = None

    def __post_init__(self):
        x = np.array(self.x, dtype=np.float64)
        x.setflags(write=False)
        object.__setattr__(self, "x", x)


def omniscient_objective(v, v_star, eta, loss, x, y):
    """One-step change in ||v - v*||^2 caused by teaching (x, y)."""
    v = np.asarray(v, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    beta = loss_grad(loss, float(v @ x), y)
    return (eta * eta * beta * beta * float(x @ x)
            - 2.0 * eta * beta * float((v - v_star) @ x))


def et_condition_check(gamma, beta, eta, spectral, lam=0.0):
    """Check gamma*beta against the exponential-teachability window."""
    limit = min(spectral.kappa / math.sqrt(2.0), 1.0)
    if not (0.0 <= lam < limit):
        raise ValueError(
            f"lam must lie in [0, {limit:.6g}) for this spectrum, got {lam}")
    gb = float(gamma) * float(beta)
    upper = 2.0 * (1.0 - lam) * spectral.sigma_min / (
        eta * spectral.sigma_max ** 2)
    return ETCheckReport(gamma_beta=gb, upper_bound=upper, lam=lam,
                         satisfied=bool(0.0 < gb < upper))


def _attach_et(sel, v, eta, loss, spectral, lam):
    if spectral is None:
        return sel
    beta = loss_grad(loss, float(np.asarray(v) @ sel.x), sel.y)
    report = et_condition_check(sel.gamma, beta, eta, spectral, lam)
    return replace(sel, et=report)


def select_pool(v, v_star, mode, eta, loss, spectral=None, lam=0.0):
    """Exact argmin of the one-step objective over pool x gamma grid.

    Candidates whose rescaled norm violates the mode's norm bound are
    skipped.  Ties break toward the lowest pool index, then the smallest
    |gamma|.
    """
    if mode.tag not in ("pool", "rescalable_pool"):
        raise ValueError(f"select_pool needs a pool mode, got {mode.tag!r}")
    v = np.asarray(v, dtype=np.float64)
    v_star = np.asarray(v_star, dtype=np.float64)
    x_pool, y_pool = mode.pool_x, mode.pool_y
    base_z = x_pool @ v
    base_diff = x_pool @ (v - v_star)
    norms_sq = mode.pool_norms_sq
    # one (grid, pool) sweep; elementwise ops keep per-candidate rounding
    # identical to a scalar evaluation
    grid = mode.gamma_grid
    g_col = grid[:, None]
    z = g_col * base_z
    beta = loss_grad(loss, z, y_pool)
    obj = (eta * eta * beta * beta * (g_col * g_col) * norms_sq
           - 2.0 * eta * beta * g_col * base_diff)
    if mode.norm_bound is not None:
        obj = np.where(
            np.abs(g_col) * np.sqrt(norms_sq) <= mode.norm_bound, obj, np.inf)
    best = None  # (objective, index, |gamma|, gamma)
    rows = np.argmin(obj, axis=1)
    for gi, i in enumerate(rows):
        val = obj[gi, i]
        if not np.isfinite(val):
            continue
        key = (float(val), int(i), abs(float(grid[gi])))
        if best is None or key < best[0]:
            best = (key, float(grid[gi]))
    if best is None:
        raise ValueError(
            "no pool candidate satisfies the norm bound; nothing to teach")
    (obj_val, idx, _), gamma = best
    x_sel = gamma * x_pool[idx]
    y_sel = float(y_pool[idx])
    sel = SelectedExample(
        x=x_sel, y=y_sel, gamma=gamma,
        objective=omniscient_objective(v, v_star, eta, loss, x_sel, y_sel),
        index=idx)
    return _attach_et(sel, v, eta, loss, spectral, lam)


def _line_objective(gamma, v, v_star, eta, loss, direction, b_star):
    """Best objective (and its label) at a point on the synthesis line."""
    x = gamma * direction
    if loss == "square":
        y = gamma * b_star
        return omniscient_objective(v, v_star, eta, loss, x, y), y
    best = (np.inf, 1.0)
    for y in (-1.0, 1.0):
        val = omniscient_objective(v, v_star, eta, loss, x, y)
        if val < best[0]:
            best = (val, y)
    return best


def _synthesis_search(v, v_star, direction, norm_bound, eta, loss):
    """Grid-plus-golden-section minimization along gamma * direction."""
    dir_norm = float(np.linalg.norm(direction))
    if dir_norm == 0.0:
        raise TeachingComplete("virtual learner already matches the target")
    b_star = float(np.asarray(v_star) @ direction)
    g_max = norm_bound / dir_norm
    grid = np.linspace(-g_max, g_max, _SYNTH_GRID_POINTS)

    def phi(g):
        return _line_objective(g, v, v_star, eta, loss, direction, b_star)

    vals = np.array([phi(g)[0] for g in grid])
    i = int(np.argmin(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]

    # Golden-section refinement of the bracket around the grid winner.
    # The width floor is relative to the bracket magnitude: an absolute
    # floor below one ulp of the endpoints never terminates.
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = phi(c)[0], phi(d)[0]
    while (b - a) > _GOLDEN_WIDTH * max(1.0, abs(a), abs(b)):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = phi(c)[0]
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = phi(d)[0]
    gamma = 0.5 * (a + b)
    obj, label = phi(gamma)
    if vals[i] < obj:
        gamma = float(grid[i])
        obj, label = phi(gamma)
    x_sel = gamma * direction
    return SelectedExample(
        x=x_sel, y=float(label), gamma=float(gamma),
        objective=omniscient_objective(v, v_star, eta, loss, x_sel, label))


def select_synthesis(v, v_star, mode, eta, loss, spectral=None, lam=0.0):
    """Best synthesized example gamma * (v - v*) within the norm ball.

    The label for the square loss is the target's own prediction
    <v*, x>; classification losses try both labels.  gamma is located by
    a 2001-point grid scan refined by golden-section search.
    """
    if mode.tag != "synthesis":
        raise ValueError(
            f"select_synthesis needs a synthesis mode, got {mode.tag!r}")
    v = np.asarray(v, dtype=np.float64)
    v_star = np.asarray(v_star, dtype=np.float64)
    sel = _synthesis_search(v, v_star, v - v_star, mode.norm_bound, eta, loss)
    return _attach_et(sel, v, eta, loss, spectral, lam)


def select_combination(v, v_star, mode, eta, loss, spectral=None, lam=0.0):
    """Synthesis search restricted to the candidate span.

    The search direction is the projection of (v - v*) onto span(D); a
    projection this close to zero means the remaining error is invisible
    inside the span and teaching cannot proceed.
    """
    if mode.tag != "combination":
        raise ValueError(
            f"select_combination needs a combination mode, got {mode.tag!r}")
    v = np.asarray(v, dtype=np.float64)
    v_star = np.asarray(v_star, dtype=np.float64)
    for name, vec in (("virtual learner", v), ("target", v_star)):
        gap = float(np.linalg.norm(project_span(mode.span, vec) - vec))
        if gap > 1e-8 * (1.0 + float(np.linalg.norm(vec))):
            warnings.warn(
                f"{name} lies outside the combination span "
                f"(distance {gap:.3e}); teaching may stall",
                stacklevel=2)
    direction = project_span(mode.span, v - v_star)
    if float(np.linalg.norm(direction)) <= 1e-12:
        raise DegenerateDirectionError(
            "teaching direction has no component in the candidate span")
    sel = _synthesis_search(v, v_star, direction, mode.norm_bound, eta, loss)
    return _attach_et(sel, v, eta, loss, spectral, lam)


def select_example(v, v_star, mode, eta, loss, spectral=None, lam=0.0):
    """Dispatch selection on the teaching mode."""
    if mode.tag in ("pool", "rescalable_pool"):
        return select_pool(v, v_star, mode, eta, loss, spectral, lam)
    if mode.tag == "synthesis":
        return select_synthesis(v, v_star, mode, eta, loss, spectral, lam)
    if mode.tag == "combination":
        return select_combination(v, v_star, mode, eta, loss, spectral, lam)
    raise ValueError(f"unknown teaching mode {mode.tag!r}")


def random_select(mode, gen):
    """Uniform pool draw with gamma = 1 (the SGD baseline)."""
    if mode.pool_x is None:
        raise ValueError("random selection needs a pool mode")
    idx = int(gen.integers(mode.pool_x.shape[0]))
    return SelectedExample(
        x=mode.pool_x[idx], y=float(mode.pool_y[idx]), gamma=1.0,
        objective=float("nan"), index=idx)


def pool_volume(metric, pool_x, n_dirs, seed):
    """Monte Carlo estimate of the teaching volume of a pool.

    Samples unit directions w inside span(D) and returns the smallest
    observed max_x <w, x>_D / ||w||_D^2.  Directions are drawn from one
    sequential stream, so increasing n_dirs with the same seed only adds
    directions and the estimate is monotone non-increasing.
    """
    if n_dirs < 1:
        raise ValueError(f"n_dirs must be >= 1, got {n_dirs}")
    pool_x = np.asarray(pool_x, dtype=np.float64)
    gen = substream(seed, KEY_VOLUME)
    worst = np.inf
    produced = 0
    while produced < n_dirs:
        g = gen.standard_normal(metric.dim)
        w = project_span(metric, g)
        nrm = float(np.linalg.norm(w))
        if nrm < 1e-12:
            continue
        w = w / nrm
        worst = min(worst, float(np.max(pool_x @ w)))
        produced += 1
    return worst


class RandomTeacher:
    """SGD baseline: uniform pool sampling, no feedback used."""

    def __init__(self, mode, seed):
        if mode.pool_x is None:
            raise ValueError("the random teacher needs a pool mode")
        self._mode = mode
        self._gen = substream(seed, KEY_SELECT)

    def step(self, remote):
        sel = random_select(self._mode, self._gen)
        remote.teach(sel.x, sel.y)
        return sel


class OmniscientTeacher:
    """White-box teacher: reads the student weights and map directly."""

    def __init__(self, v_star, mode, eta, loss, stop_tol=0.0,
                 spectral=None, lam=0.0):
        self.v_star = np.asarray(v_star, dtype=np.float64)
        self.mode = mode
        self.eta = eta
        self.loss = loss
        self.stop_tol = stop_tol
        self.spectral = spectral
        self.lam = lam

    def step(self, remote):
        w = remote.observe_parameters()
        v = conjugate_apply(remote.fmap, w)
        if float(np.linalg.norm(v - self.v_star)) <= self.stop_tol:
            return None
        try:
            sel = select_example(v, self.v_star, self.mode, self.eta,
                                 self.loss, self.spectral, self.lam)
        except TeachingComplete:
            return None
        remote.teach(sel.x, sel.y)
        return sel


class ActiveTeacher:
    """Black-box teacher driven by feedback exams.

    Maintains a virtual learner v ~= G^T w.  exam_period None means one
    background exam on first contact and deterministic propagation ever
    after (sound when the map is conjugate-orthogonal, where the initial
    estimation error is provably never amplified); an integer period
    re-examines every that-many iterations.  "auto" resolves to None for
    unitary maps and 1 otherwise.  With sign feedback and adaptive_eps,
    each exam's target error shrinks with the remaining distance so that
    estimation noise never dominates the contraction budget.
    """

    def __init__(self, v_star, mode, eta, loss, recovery=None,
                 exam_period="auto", stop_tol=0.0, spectral=None, lam=0.0,
                 adaptive_eps=False):
        self.v_star = np.asarray(v_star, dtype=np.float64)
        self.mode = mode
        self.eta = eta
        self.loss = loss
        self.recovery = recovery if recovery is not None else RecoveryConfig()
        self.exam_period = exam_period
        self.stop_tol = stop_tol
        self.spectral = spectral
        self.lam = lam
        self.adaptive_eps = adaptive_eps
        self.virtual = None
        self._t = 0
        self._last_exam_t = None

    def prime(self, remote):
        """Run the background exam now instead of lazily on first step.

        Used when a teacher takes over an already-trained student: the
        handoff itself pays the exam cost, even if the teacher then
        teaches for zero iterations.
        """
        self._resolve_period(remote)
        self._examine(remote)

    def _exam_due(self):
        if self._last_exam_t == self._t:
            return False
        if self._last_exam_t is None:
            return True
        period = self.exam_period
        if period in (None, "auto"):
            return False
        return self._t % period == 0

    def _resolve_period(self, remote):
        if self.exam_period == "auto":
            self.exam_period = None if remote.unitary_map else 1

    def _examine(self, remote):
        cfg = self.recovery
        if remote.feedback == "sign":
            norm = remote.disclosed_norm()
            eps = cfg.eps_est
            if self.adaptive_eps and self.virtual is not None:
                dist = float(np.linalg.norm(self.virtual.v - self.v_star))
                ratio = (self.spectral.sigma_min / self.spectral.sigma_max
                         if self.spectral is not None else 1.0)
                eps = max(max(self.lam, 1e-3) * ratio * dist, 1e-12)
            cfg = replace(cfg, known_norm=norm, eps_est=eps)
        result = construct_virtual_learner(remote, cfg)
        self.virtual = VirtualLearner(
            v=result.v_hat, est_error=result.est_error(), stale=False)
        self._last_exam_t = self._t

    def step(self, remote):
        self._resolve_period(remote)
        if self._exam_due():
            self._examine(remote)
        v = self.virtual.v
        if float(np.linalg.norm(v - self.v_star)) <= self.stop_tol:
            return None
        try:
            sel = select_example(v, self.v_star, self.mode, self.eta,
                                 self.loss, self.spectral, self.lam)
        except TeachingComplete:
            return None
        remote.teach(sel.x, sel.y)
        beta = loss_grad(self.loss, float(v @ sel.x), sel.y)
        self.virtual = VirtualLearner(
            v=v - self.eta * beta * sel.x,
            est_error=self.virtual.est_error, stale=True)
        self._t += 1
        return sel


class LazyTeacher(ActiveTeacher):
    """One background exam, then open-loop virtual updates forever."""

    def __init__(self, v_star, mode, eta, loss, recovery=None,
                 stop_tol=0.0, spectral=None, lam=0.0):
        super().__init__(v_star, mode, eta, loss, recovery=recovery,
                         exam_period=None, stop_tol=stop_tol,
                         spectral=spectral, lam=lam)
