"""Feedback exams: reconstructing the student's pullback weights.

The teacher cannot read the student's weight vector w.  What it can do is
send queries and observe F(<w, G q>) = F(<G^T w, q>), which turns weight
recovery into a problem about v = G^T w in the teacher's own space:

* invertible F (identity, sigmoid): d well-conditioned queries give a
  linear system for v, solved exactly;
* hinge-value F: each query direction is paired with its negation; one of
  the pair responds on its linear piece (or both vanish), again giving d
  usable equations;
* sign F: only the direction of v is observable, so it is pinned down by
  a deterministic sequence of halfspace probes and rescaled by the
  externally supplied norm of G^T w.

All exams leave the student untouched; only teaching steps move w.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .feature_space import apply_map, conjugate_apply
from .learners import (SaturationError, feedback_invert, forgetting_step,
                       loss_grad, respond, sgd_step)
from .rng import KEY_PROBE, KEY_QUERIES, substream

_RANK_TOL = 1e-10
# Tangent offsets below this are treated as exact hits when pinning
# coordinates of the direction estimate.
_PIN_OFFSET = 1e-13
_GRAD_COORD_MIN = 1e-8


class RankDeficientError(ValueError):
    """Query set too close to singular to solve for the learner."""


class RemoteLearner:
    """The teacher's only channel to a student.

    Wraps a learner state together with the feature map and exposes just
    the protocol surface: feedback queries, teaching steps, and the public
    facts of the protocol (dimensions, loss/feedback kinds, whether the
    map is conjugate-orthogonal).  Weights stay behind
    ``observe_parameters``, which exists for white-box baselines and
    counts every use so tests can prove the black-box teachers never call
    it.
    """

    def __init__(self, learner, fmap):
        if learner.dim != fmap.s:
            raise ValueError(
                f"learner dimension {learner.dim} != map output dimension "
                f"{fmap.s}")
        self._state = learner
        self._fmap = fmap
        self.query_samples = 0
        self.teaching_samples = 0
        self.white_box_reads = 0
        self.norm_disclosures = 0

    @property
    def dim(self):
        """Teacher-space dimension of the map."""
        return self._fmap.d

    @property
    def loss(self):
        return self._state.loss

    @property
    def feedback(self):
        return self._state.feedback

    @property
    def unitary_map(self):
        return self._fmap.is_unitary

    @property
    def state(self):
        """Current learner state (harness/evaluation access)."""
        return self._state

    @property
    def fmap(self):
        return self._fmap

    def query(self, x):
        """Feedback F(<w, G x>) for a teacher-space query x."""
        self.query_samples += 1
        return respond(self._state, apply_map(self._fmap, x))

    def teach(self, x, y):
        """Feed the training pair; the student perceives (G x, y)."""
        x_tilde = apply_map(self._fmap, x)
        if self._state.sigma_forget > 0.0:
            self._state = forgetting_step(self._state, x_tilde, y)
        else:
            self._state = sgd_step(self._state, x_tilde, y)
        self.teaching_samples += 1

    def observe_parameters(self):
        """White-box read of the student weights (counted)."""
        self.white_box_reads += 1
        return np.array(self._state.w)

    def disclosed_norm(self):
        """||G^T w||, the one scalar the protocol reveals to sign-feedback
        teachers (the sign channel is scale-blind, so the norm must be
        supplied out of band).  Counted separately from white-box reads."""
        self.norm_disclosures += 1
        return float(np.linalg.norm(conjugate_apply(self._fmap,
                                                    self._state.w)))


@dataclass(frozen=True)
class QuerySet:
    """Teacher-space query directions, one per matrix row."""
    matrix: np.ndarray
    kind: str  # "basis_d" | "paired_2d"

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self):
        return self.matrix.shape[1]

    def __len__(self):
        return self.matrix.shape[0]


@dataclass(frozen=True)
class RecoveryConfig:
    """Knobs for virtual-learner construction.

    eps_est: target bound on ||v_hat - G^T w|| for the sign branch.
    delta: confidence budget carried in reports (the sign scheme here is
      deterministic, so delta only annotates downstream bookkeeping).
    lam: fraction of the contraction budget allowed to estimation error.
    known_norm: ||G^T w||, which sign feedback cannot reveal.
    contraction_rho: guaranteed per-round shrink factor of the direction
      error's sine.
    """
    eps_est: float = 1e-6
    delta: float = 0.05
    lam: float = 0.1
    known_norm: float | None = None
    max_rounds: int = 60
    contraction_rho: float = 0.8
    query_seed: int = 0
    standard_queries: bool = False

    def __post_init__(self):
        if self.eps_est <= 0:
            raise ValueError(f"eps_est must be > 0, got {self.eps_est}")
        if not (0 < self.delta < 1):
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if not (0 <= self.lam < 1):
            raise ValueError(f"lam must lie in [0, 1), got {self.lam}")
        if self.known_norm is not None and self.known_norm <= 0:
            raise ValueError(
                f"known_norm must be > 0 when given, got {self.known_norm}")
        if self.max_rounds < 1:
            raise ValueError(f"max_rounds must be >= 1, got {self.max_rounds}")
        if not (0 < self.contraction_rho < 1):
            raise ValueError(
                f"contraction_rho must lie in (0, 1), got "
                f"{self.contraction_rho}")


@dataclass(frozen=True)
class ExamResult:
    """Outcome of one exam.

    Exact branches report the max linear-system residual; the sign branch
    reports a certified bound on sin(angle) between the estimated and true
    directions, plus the per-round direction history for diagnostics.
    """
    v_hat: np.ndarray
    queries_used: int
    kind: str
    residual: float | None = None
    angle_bound: float | None = None
    known_norm: float | None = None
    alpha_history: tuple = field(default=())

    def __post_init__(self):
        v = np.array(self.v_hat, dtype=np.float64)
        v.setflags(write=False)
        object.__setattr__(self, "v_hat", v)

    def est_error(self):
        """Bound on ||v_hat - G^T w|| implied by this exam."""
        if self.residual is not None:
            return self.residual
        return self.known_norm * self.angle_bound


def make_basis_queries(d, seed, standard=False):
    """d teacher-space query directions forming a full-rank set.

    standard=True returns the coordinate basis e_1..e_d; otherwise seeded
    Gaussian directions, redrawn in the (astronomically unlikely) event of
    near-singularity.  Same seed -> same queries, so exams are replayable.
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if standard:
        return QuerySet(np.eye(d), "basis_d")
    gen = substream(seed, KEY_QUERIES)
    for _ in range(64):
        m = gen.standard_normal((d, d))
        svals = np.linalg.svd(m, compute_uv=False)
        if svals[-1] > 1e-8:
            return QuerySet(m, "basis_d")
    raise RankDeficientError("could not draw a full-rank query set")


def make_paired_queries(d, seed, standard=False):
    """2d queries arranged as consecutive pairs (z_i, -z_i)."""
    base = make_basis_queries(d, seed, standard=standard)
    rows = np.empty((2 * d, d))
    rows[0::2] = base.matrix
    rows[1::2] = -base.matrix
    return QuerySet(rows, "paired_2d")


def _solve_square(queries, rhs):
    svals = np.linalg.svd(queries, compute_uv=False)
    if svals[-1] <= _RANK_TOL * svals[0]:
        raise RankDeficientError(
            f"query matrix numerically singular (relative smallest "
            f"singular value {svals[-1] / svals[0]:.3e})")
    return np.linalg.solve(queries, rhs)


def exact_recover_bijective(queries, responses, feedback):
    """Recover v = G^T w from responses through an invertible feedback.

    Inverts F pointwise and solves the d x d system <v, q_j> = F^-1(r_j).
    """
    if queries.kind != "basis_d":
        raise ValueError(f"expected basis_d queries, got {queries.kind!r}")
    responses = np.asarray(responses, dtype=np.float64)
    if responses.shape != (len(queries),):
        raise ValueError(
            f"expected {len(queries)} responses, got shape {responses.shape}")
    rhs = feedback_invert(feedback, responses)
    v_hat = _solve_square(queries.matrix, rhs)
    residual = float(np.max(np.abs(queries.matrix @ v_hat - rhs)))
    return ExamResult(v_hat=v_hat, queries_used=len(queries),
                      kind="exact_bijective", residual=residual)


def exact_recover_hinge(queries, responses):
    """Recover v from hinge-value feedback max(0, <v, q>).

    For each pair (z, -z): a positive response on either side lands on the
    linear piece of the hinge and yields a signed equation; both responses
    zero force <v, z> = 0 exactly.  Either way each pair contributes one
    equation, so d pairs determine v.
    """
    if queries.kind != "paired_2d":
        raise ValueError(f"expected paired_2d queries, got {queries.kind!r}")
    responses = np.asarray(responses, dtype=np.float64)
    if responses.shape != (len(queries),):
        raise ValueError(
            f"expected {len(queries)} responses, got shape {responses.shape}")
    if np.any(responses < 0):
        raise ValueError("hinge-value responses cannot be negative")
    d = queries.dim
    base = queries.matrix[0::2]
    pos = responses[0::2]
    neg = responses[1::2]
    rhs = np.where(pos > 0, pos, -neg)
    v_hat = _solve_square(base, rhs)
    residual = float(np.max(np.abs(base @ v_hat - rhs)))
    return ExamResult(v_hat=v_hat, queries_used=len(queries),
                      kind="exact_hinge", residual=residual)


def _tangent_frame(alpha):
    """Orthonormal basis of the hyperplane orthogonal to unit alpha.

    Columns of the returned (d, d-1) matrix are the non-alpha columns of
    the Householder reflection exchanging e_1 and alpha, so the frame is a
    deterministic function of alpha.
    """
    d = alpha.shape[0]
    e1 = np.zeros(d)
    e1[0] = 1.0
    u = e1 - alpha
    nu = np.linalg.norm(u)
    if nu < 1e-12:
        h = np.eye(d)
    else:
        u = u / nu
        h = np.eye(d) - 2.0 * np.outer(u, u)
    return h[:, 1:]


def approx_recover_sign(sign_oracle, d, config):
    """Estimate v = G^T w from sign feedback plus its known norm.

    Sign responses expose only which side of each queried hyperplane the
    direction u = v / ||v|| lies on.  The scheme works in the tangent chart
    anchored at an initial estimate alpha_0:

    1. Query the d coordinate signs s_i = sign(u_i) and set
       alpha_0 = s / sqrt(d).  Then <u, alpha_0> = ||u||_1 / sqrt(d)
       >= 1 / sqrt(d) > 0, so u is a graph over the tangent plane at
       alpha_0 with chart coordinates p_j = <u, tau_j> / <u, alpha_0>
       bounded by sqrt(d-1) in norm.
    2. A probe tau_j - t * alpha_0 answers sign(p_j - t), so each chart
       coordinate supports interval bisection.  Probes at +-1e-13 first
       pin coordinates that are exactly zero (an aligned start never
       moves, and converges in zero rounds).
    3. Round k bisects the per-coordinate brackets until the certified
       chart error E_k = sqrt(sum of squared half-widths) satisfies
       E_k <= rho^k * L_k, where L_k = max(0, ||center|| - E_k) is a
       certified lower bound on ||p||.  Since sin(angle(estimate, u)) <=
       ||p - center|| / sqrt(1 + ||p||^2) and sin(angle(alpha_0, u)) =
       ||p|| / sqrt(1 + ||p||^2), that inequality is exactly the round-k
       contraction guarantee sin_k <= rho^k * sin_0.

    Stops once norm * 2 * E_k <= eps_est (2 * E_k bounds the unit-vector
    chord) or after max_rounds.  Reported angle_bound is the certified
    sine bound E_k; queries_used counts every oracle call.
    """
    if config.known_norm is None:
        raise ValueError("sign recovery requires known_norm")
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    norm = config.known_norm
    rho = config.contraction_rho
    counter = {"n": 0}

    def ask(q):
        counter["n"] += 1
        return 1.0 if sign_oracle(q) >= 0 else -1.0

    if d == 1:
        s = ask(np.ones(1))
        v_hat = np.array([s * norm])
        return ExamResult(v_hat=v_hat, queries_used=counter["n"],
                          kind="approx_sign", angle_bound=0.0,
                          known_norm=norm,
                          alpha_history=(np.array([s]),))

    eye = np.eye(d)
    signs = np.array([ask(eye[i]) for i in range(d)])
    alpha0 = signs / math.sqrt(d)
    taus = _tangent_frame(alpha0)

    m = d - 1
    bound = math.sqrt(d - 1)
    lo = np.full(m, -bound)
    hi = np.full(m, bound)
    pinned = np.zeros(m, dtype=bool)

    def probe(j, t):
        return ask(taus[:, j] - t * alpha0)

    # The contraction guarantee is anchored at the chart origin, so the
    # recorded initial estimate must be alpha0 itself.
    history = [alpha0.copy()]

    # Zero-pinning pass: exact alignments resolve immediately.
    for j in range(m):
        below = probe(j, _PIN_OFFSET)
        above = probe(j, -_PIN_OFFSET)
        if below < 0 and above > 0:
            lo[j] = -_PIN_OFFSET
            hi[j] = _PIN_OFFSET
            pinned[j] = True
        elif below > 0:
            lo[j] = _PIN_OFFSET
        else:
            hi[j] = -_PIN_OFFSET

    def chart_state():
        center = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        err = float(np.linalg.norm(half))
        return center, err

    def alpha_from(center):
        a = alpha0 + taus @ center
        return a / np.linalg.norm(a)

    center, err = chart_state()
    angle_bound = err

    if bool(np.all(pinned)):
        # True direction equals the initial estimate: done in 0 rounds.
        v_hat = norm * history[0]
        return ExamResult(v_hat=v_hat, queries_used=counter["n"],
                          kind="approx_sign", angle_bound=angle_bound,
                          known_norm=norm, alpha_history=tuple(history))

    for k in range(1, config.max_rounds + 1):
        # Shrink brackets until the certified sine bound contracts by
        # rho^k relative to the certified chart norm.
        budget = 64 * m
        while budget > 0:
            center, err = chart_state()
            lower = max(0.0, float(np.linalg.norm(center)) - err)
            if err <= 1e-15 or (lower > 0 and err <= rho ** k * lower):
                break
            j = int(np.argmax(np.where(pinned, -np.inf, hi - lo)))
            mid = 0.5 * (lo[j] + hi[j])
            if probe(j, mid) > 0:
                lo[j] = mid
            else:
                hi[j] = mid
            budget -= 1
        center, err = chart_state()
        history.append(alpha_from(center))
        angle_bound = err
        if norm * 2.0 * err <= config.eps_est or err <= 1e-15:
            break

    v_hat = norm * history[-1]
    return ExamResult(v_hat=v_hat, queries_used=counter["n"],
                      kind="approx_sign", angle_bound=angle_bound,
                      known_norm=norm, alpha_history=tuple(history))


def construct_virtual_learner(remote, config):
    """Run the exam appropriate to the student's feedback channel.

    Dispatches on feedback kind: identity/sigmoid use d basis queries and
    a linear solve, hinge-value uses d query pairs, and sign feedback runs
    the iterative direction search (requires config.known_norm).
    """
    d = remote.dim
    kind = remote.feedback
    if kind in ("identity", "sigmoid"):
        queries = make_basis_queries(d, config.query_seed,
                                     standard=config.standard_queries)
        responses = np.array([remote.query(q) for q in queries.matrix])
        return exact_recover_bijective(queries, responses, kind)
    if kind == "hinge_value":
        queries = make_paired_queries(d, config.query_seed,
                                      standard=config.standard_queries)
        responses = np.array([remote.query(q) for q in queries.matrix])
        return exact_recover_hinge(queries, responses)
    if kind == "sign":
        return approx_recover_sign(remote.query, d, config)
    raise ValueError(f"no exam protocol for feedback {kind!r}")


def estimate_learning_rate(remote, seed):
    """Estimate the student's hidden step size from two exams and one step.

    Reconstructs v1 = G^T w before and v2 = G^T w after feeding a single
    probe pair (x_r, y_r); for an inner-product-preserving map the update
    gives v1 - v2 = eta * beta * x_r coordinate-wise, so eta is the mean
    of (v1 - v2)_i / (beta * x_r)_i over coordinates whose gradient entry
    clears 1e-8 in magnitude.  The probe is drawn orthogonal to v1 so the
    prediction sits at 0 and beta is bounded away from zero; the label is
    +1 for margin losses and <v1, x_r> - 1 for the square loss.  Consumes
    exactly (exam queries) + 1 + (exam queries) interactions.
    """
    if remote.feedback == "sign":
        raise ValueError(
            "learning-rate estimation needs an exactly recoverable "
            "feedback channel")
    config = RecoveryConfig(query_seed=seed)
    first = construct_virtual_learner(remote, config)
    v1 = first.v_hat

    gen = substream(seed, KEY_PROBE)
    x_r = gen.standard_normal(remote.dim)
    v1_sq = float(v1 @ v1)
    if v1_sq > 0:
        x_r = x_r - (float(x_r @ v1) / v1_sq) * v1
    if remote.loss == "square":
        y_r = float(v1 @ x_r) - 1.0
    else:
        y_r = 1.0
    beta = loss_grad(remote.loss, float(v1 @ x_r), y_r)
    remote.teach(x_r, y_r)

    second = construct_virtual_learner(remote, config)
    v2 = second.v_hat

    grad = beta * x_r
    usable = np.abs(grad) >= _GRAD_COORD_MIN
    if not np.any(usable):
        raise ValueError(
            "probe gradient vanished in every coordinate; cannot "
            "estimate the learning rate")
    ratios = (v1[usable] - v2[usable]) / grad[usable]
    return float(np.mean(ratios))
