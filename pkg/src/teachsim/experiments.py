"""Experiment harness: datasets, optimal targets, teaching runs, traces.

A run wires the pieces together: generate or ingest a dataset, train the
target v* the teacher steers toward, build the feature map and the
student, then iterate teacher steps while recording an evaluation trace.
The harness is omniscient for metric purposes (it computes ||G^T w - v*||
directly) even when the teacher being driven is not.
"""

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .exam import RecoveryConfig, RemoteLearner
from .feature_space import FeatureMap, conjugate_apply, random_map
from .learners import (ForgettingConfig, LearnerState, loss_value,
                       training_objective)
from .rng import (KEY_DATA, KEY_INIT, KEY_SELECT, KEY_SPLIT, derive_seed,
                  substream)
from .teachers import (ActiveTeacher, LazyTeacher, OmniscientTeacher,
                       RandomTeacher, TeachingMode)

TEACHER_KINDS = ("random", "omniscient", "lazy", "active")

# Fixed substream index per teacher kind, so scenario replicates differ
# only in teacher-specific sampling, never in shared data or noise.
_TEACHER_STREAM = {kind: i for i, kind in enumerate(TEACHER_KINDS)}


class TrainingError(RuntimeError):
    """Target optimization failed to reach its tolerance."""


class TraceFormatError(ValueError):
    """A trace file violates the expected column layout."""


@dataclass(frozen=True)
class DatasetSpec:
    """Synthetic data recipe.

    For classification, n counts examples per class drawn from Gaussians
    with means +-(mean_separation, ..., mean_separation) and identity
    covariance; for regression, n is the total number of rows with
    Gaussian features and y = <w*, x> + noise_sigma * eps.
    """
    task: str = "classification"
    d: int = 50
    n: int = 1000
    noise_sigma: float = 0.0
    mean_separation: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.task not in ("regression", "classification"):
            raise ValueError(f"unknown task {self.task!r}")
        if self.d < 1 or self.n < 1:
            raise ValueError("d and n must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved description of one teaching run."""
    dataset: DatasetSpec = DatasetSpec()
    source: str | None = None
    label_column: str = "label"
    map_kind: str = "identity"
    map_seed: int = 0
    loss: str = "square"
    feedback: str = "identity"
    eta: float = 1e-4
    sigma_forget: float = 0.0
    noise_seed: int = 0
    w0_seed: int = 0
    teacher: str = "omniscient"
    exam_period: object = "auto"
    stop_tol: float = 1e-6
    mode_kind: str = "pool"
    norm_bound: float | None = None
    gamma_grid: tuple | None = None
    recovery: RecoveryConfig = field(default_factory=RecoveryConfig)
    adaptive_eps: bool = False
    lam: float = 0.0
    ridge: float = 5e-5
    iterations: int = 1000
    metrics_period: int = 1
    test_fraction: float = 0.2
    run_seed: int = 0

    def __post_init__(self):
        if self.teacher not in TEACHER_KINDS:
            raise ValueError(f"unknown teacher kind {self.teacher!r}")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.metrics_period < 1:
            raise ValueError("metrics_period must be >= 1")
        if not (0.0 <= self.test_fraction < 1.0):
            raise ValueError("test_fraction must lie in [0, 1)")


@dataclass(frozen=True)
class TraceRow:
    """State of a run after `iteration` teaching steps."""
    iteration: int
    objective: float
    param_dist: float
    test_accuracy: float | None
    teaching_samples: int
    query_samples: int


@dataclass(frozen=True)
class ExponentialFit:
    """Least-squares exponential-decay summary of a trace."""
    rate: float
    log_rmse: float
    n_points: int


def gen_regression_data(spec):
    """Gaussian features with linear responses; returns (X, y, w_star)."""
    if spec.task != "regression":
        raise ValueError(f"spec.task is {spec.task!r}, not regression")
    gen = substream(spec.seed, KEY_DATA)
    w_star = gen.standard_normal(spec.d)
    features = gen.standard_normal((spec.n, spec.d))
    labels = features @ w_star
    if spec.noise_sigma > 0:
        labels = labels + spec.noise_sigma * gen.standard_normal(spec.n)
    return features, labels, w_star


def gen_classification_data(spec):
    """Two balanced Gaussian classes with +-1 labels; returns (X, y)."""
    if spec.task != "classification":
        raise ValueError(f"spec.task is {spec.task!r}, not classification")
    gen = substream(spec.seed, KEY_DATA)
    mean = np.full(spec.d, spec.mean_separation)
    pos = gen.standard_normal((spec.n, spec.d)) + mean
    neg = gen.standard_normal((spec.n, spec.d)) - mean
    features = np.vstack([pos, neg])
    labels = np.concatenate([np.ones(spec.n), -np.ones(spec.n)])
    order = gen.permutation(2 * spec.n)
    return features[order], labels[order]


def write_tabular(path, features, labels, label_column="label"):
    """Write a dataset as headed CSV with full float round-trip precision."""
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    names = [f"f{i}" for i in range(features.shape[1])] + [label_column]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for row, lab in zip(features, labels):
            writer.writerow([f"{x:.17g}" for x in row] + [f"{lab:.17g}"])


def ingest_tabular(path, label_column="label"):
    """Read a headed CSV of numeric columns; returns (X, y, feature_names).

    Parse failures name the offending row and column.  Values written by
    write_tabular read back bit-equal.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TraceFormatError(f"{path}: empty file, expected a header")
        header = [h.strip() for h in header]
        if label_column not in header:
            raise TraceFormatError(
                f"{path}: no column named {label_column!r} in header "
                f"{header}")
        label_idx = header.index(label_column)
        feature_names = [h for h in header if h != label_column]
        rows = []
        labels = []
        for r, raw in enumerate(reader, start=2):
            if len(raw) != len(header):
                raise TraceFormatError(
                    f"{path}: row {r} has {len(raw)} fields, expected "
                    f"{len(header)}")
            vals = []
            for name, cell in zip(header, raw):
                try:
                    x = float(cell)
                except ValueError:
                    raise TraceFormatError(
                        f"{path}: row {r}, column {name!r}: "
                        f"cannot parse {cell!r} as a number") from None
                if not math.isfinite(x):
                    raise TraceFormatError(
                        f"{path}: row {r}, column {name!r}: non-finite "
                        f"value {cell!r}")
                vals.append(x)
            labels.append(vals.pop(label_idx))
            rows.append(vals)
    if not rows:
        raise TraceFormatError(f"{path}: no data rows")
    return (np.array(rows, dtype=np.float64),
            np.array(labels, dtype=np.float64), feature_names)


def random_project(features, out_dim, seed, kind="gaussian"):
    """Project rows into out_dim dimensions; returns (view, projection).

    kind "identity" requires out_dim == input dimension and returns the
    data unchanged (with an identity projection matrix).
    """
    features = np.asarray(features, dtype=np.float64)
    raw_dim = features.shape[1]
    if kind == "identity":
        if out_dim != raw_dim:
            raise ValueError(
                f"identity projection needs out_dim == {raw_dim}, got "
                f"{out_dim}")
        proj = np.eye(raw_dim)
    elif kind == "gaussian":
        gen = substream(seed, KEY_DATA)
        proj = gen.standard_normal((out_dim, raw_dim)) / math.sqrt(out_dim)
    else:
        raise ValueError(f"unknown projection kind {kind!r}")
    return features @ proj.T, proj


def fit_feature_map(teacher_view, student_view):
    """Least-squares linear map from teacher rows to student rows.

    Returns (FeatureMap, max-abs residual).  A residual above 1e-6 means
    no exact linear map links the two views and downstream teaching is
    only approximate.
    """
    teacher_view = np.asarray(teacher_view, dtype=np.float64)
    student_view = np.asarray(student_view, dtype=np.float64)
    if teacher_view.shape[0] != student_view.shape[0]:
        raise ValueError("views must have the same number of rows")
    g_t, *_ = np.linalg.lstsq(teacher_view, student_view, rcond=None)
    residual = float(np.max(np.abs(teacher_view @ g_t - student_view)))
    return FeatureMap(g_t.T), residual


def project_two_views(features, out_dim, seed_teacher, seed_student,
                      kind="gaussian"):
    """Teacher/student views of one dataset plus the fitted map.

    Returns (teacher_view, student_view, fmap, residual).  Equal seeds
    give identical views (and an identity-like fitted map).
    """
    teacher_view, _ = random_project(features, out_dim, seed_teacher, kind)
    student_view, _ = random_project(features, out_dim, seed_student, kind)
    fmap, residual = fit_feature_map(teacher_view, student_view)
    return teacher_view, student_view, fmap, residual


def _sigmoid(t):
    e = np.exp(-np.abs(t))
    return np.where(t >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def _train_square(features, labels, ridge):
    n = features.shape[0]
    gram = features.T @ features / n + ridge * np.eye(features.shape[1])
    rhs = features.T @ labels / n
    v = np.linalg.solve(gram, rhs)
    grad_norm = float(np.linalg.norm(gram @ v - rhs))
    if grad_norm > 1e-8:
        raise TrainingError(
            f"ridge system solved poorly (gradient norm {grad_norm:.3e})")
    return v


def _train_logistic(features, labels, ridge, tol=1e-8, max_iter=200):
    """Damped Newton on the ridge-regularized logistic objective."""
    n, d = features.shape
    v = np.zeros(d)

    def objective(vv):
        z = features @ vv
        return float(np.mean(np.logaddexp(0.0, -labels * z))
                     + 0.5 * ridge * vv @ vv)

    for _ in range(max_iter):
        z = features @ v
        s = _sigmoid(-labels * z)
        grad = -(features.T @ (labels * s)) / n + ridge * v
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm <= tol:
            return v
        weights = s * (1.0 - s)
        hess = (features.T * weights) @ features / n + ridge * np.eye(d)
        step = np.linalg.solve(hess, grad)
        f0 = objective(v)
        slope = float(grad @ step)
        t = 1.0
        while t > 2.0 ** -40 and objective(v - t * step) > f0 - 0.25 * t * slope:
            t *= 0.5
        v = v - t * step
    raise TrainingError(
        f"logistic training hit the iteration cap "
        f"(gradient norm {grad_norm:.3e} > {tol:.1e})")


def _train_hinge(features, labels, ridge, tol=1e-8, max_epochs=4000):
    """Dual coordinate ascent for the ridge-regularized hinge objective.

    Maintains the dual variables of each margin constraint and stops on a
    duality-gap certificate, which (unlike raw subgradient norms) is a
    sound optimality measure for this nonsmooth objective.
    """
    n, d = features.shape
    norms_sq = np.einsum("ij,ij->i", features, features)
    alpha = np.zeros(n)
    u = np.zeros(d)  # u = sum alpha_i y_i x_i; v = u / (ridge * n)
    scale = ridge * n

    def gap():
        v = u / scale
        z = features @ v
        primal = float(np.mean(np.maximum(0.0, 1.0 - labels * z))
                       + 0.5 * ridge * v @ v)
        dual = float(np.sum(alpha) / n - (u @ u) / (2.0 * ridge * n * n))
        return primal - dual, v, primal

    for epoch in range(max_epochs):
        for i in range(n):
            if norms_sq[i] == 0.0:
                alpha[i] = 1.0
                continue
            z_i = float(features[i] @ u) / scale
            proposed = alpha[i] + scale * (1.0 - labels[i] * z_i) / norms_sq[i]
            clipped = min(max(proposed, 0.0), 1.0)
            delta = clipped - alpha[i]
            if delta != 0.0:
                alpha[i] = clipped
                u += delta * labels[i] * features[i]
        if epoch % 8 == 7 or epoch == max_epochs - 1:
            g, v, primal = gap()
            if g <= tol * max(1.0, abs(primal)):
                return v
    raise TrainingError(
        f"hinge training hit the epoch cap (duality gap {g:.3e} > "
        f"{tol:.1e} relative)")


def train_optimal(features, labels, loss, ridge=5e-5):
    """Ridge-regularized empirical optimum used as the teaching target."""
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if ridge <= 0:
        raise ValueError(f"ridge must be > 0, got {ridge}")
    if loss == "square":
        return _train_square(features, labels, ridge)
    if loss == "logistic":
        return _train_logistic(features, labels, ridge)
    if loss == "hinge":
        return _train_hinge(features, labels, ridge)
    raise ValueError(f"unknown loss {loss!r}")


def _build_data(config):
    if config.source is not None:
        features, labels, _ = ingest_tabular(config.source,
                                             config.label_column)
        return features, labels
    if config.dataset.task == "regression":
        features, labels, _ = gen_regression_data(config.dataset)
        return features, labels
    return gen_classification_data(config.dataset)


def _split(features, labels, fraction, seed):
    n = features.shape[0]
    n_test = int(round(fraction * n))
    order = substream(seed, KEY_SPLIT).permutation(n)
    test_idx, train_idx = order[:n_test], order[n_test:]
    return (features[train_idx], labels[train_idx],
            features[test_idx], labels[test_idx])


def _build_map(config, d):
    if config.map_kind == "identity":
        return FeatureMap(np.eye(d), is_unitary=True)
    return random_map(d, config.map_kind, config.map_seed)


def _build_mode(config, train_x, train_y):
    kind = config.mode_kind
    if kind == "pool":
        return TeachingMode.pool(train_x, train_y,
                                 norm_bound=config.norm_bound)
    if kind == "rescalable_pool":
        grid = (None if config.gamma_grid is None
                else np.asarray(config.gamma_grid, dtype=np.float64))
        return TeachingMode.rescalable_pool(train_x, train_y,
                                            gamma_grid=grid,
                                            norm_bound=config.norm_bound)
    if kind == "synthesis":
        if config.norm_bound is None:
            raise ValueError("synthesis mode requires norm_bound")
        return TeachingMode.synthesis(config.norm_bound)
    if kind == "combination":
        if config.norm_bound is None:
            raise ValueError("combination mode requires norm_bound")
        return TeachingMode.combination(train_x.T, config.norm_bound)
    raise ValueError(f"unknown mode kind {kind!r}")


def _initial_learner(config, fmap):
    gen = substream(config.w0_seed, KEY_INIT)
    w0 = gen.standard_normal(fmap.s)
    w0 = w0 / np.linalg.norm(w0)
    return LearnerState(w=w0, eta=config.eta, loss=config.loss,
                        feedback=config.feedback,
                        sigma_forget=config.sigma_forget,
                        seed=config.noise_seed)


def _make_teacher(kind, config, v_star, mode, spectral=None):
    if kind == "random":
        seed = derive_seed(config.run_seed, KEY_SELECT,
                           _TEACHER_STREAM[kind])
        return RandomTeacher(mode, seed)
    if kind == "omniscient":
        return OmniscientTeacher(v_star, mode, config.eta, config.loss,
                                 stop_tol=config.stop_tol,
                                 spectral=spectral, lam=config.lam)
    if kind == "lazy":
        return LazyTeacher(v_star, mode, config.eta, config.loss,
                           recovery=config.recovery,
                           stop_tol=config.stop_tol,
                           spectral=spectral, lam=config.lam)
    if kind == "active":
        return ActiveTeacher(v_star, mode, config.eta, config.loss,
                             recovery=config.recovery,
                             exam_period=config.exam_period,
                             stop_tol=config.stop_tol,
                             spectral=spectral, lam=config.lam,
                             adaptive_eps=config.adaptive_eps)
    raise ValueError(f"unknown teacher kind {kind!r}")


class _Evaluator:
    """Omniscient metric computation shared by all runners."""

    def __init__(self, v_star, train_x, train_y, test_x, test_y, loss,
                 classification):
        self.v_star = v_star
        self.train_x = train_x
        self.train_y = train_y
        self.test_x = test_x
        self.test_y = test_y
        self.loss = loss
        self.classification = classification

    def row(self, iteration, remote):
        v_t = conjugate_apply(remote.fmap, remote.state.w)
        z = self.train_x @ v_t
        objective = float(np.mean(loss_value(self.loss, z, self.train_y)))
        param_dist = float(np.linalg.norm(v_t - self.v_star))
        accuracy = None
        if self.classification and self.test_x.shape[0] > 0:
            pred = np.where(self.test_x @ v_t >= 0, 1.0, -1.0)
            accuracy = float(np.mean(pred == self.test_y))
        return TraceRow(iteration=iteration, objective=objective,
                        param_dist=param_dist, test_accuracy=accuracy,
                        teaching_samples=remote.teaching_samples,
                        query_samples=remote.query_samples)

    def distance(self, remote):
        v_t = conjugate_apply(remote.fmap, remote.state.w)
        return float(np.linalg.norm(v_t - self.v_star))


def _prepare(config):
    features, labels = _build_data(config)
    classification = (config.source is None
                      and config.dataset.task == "classification") or (
                          config.source is not None
                          and set(np.unique(labels)) <= {-1.0, 1.0})
    train_x, train_y, test_x, test_y = _split(
        features, labels, config.test_fraction, config.run_seed)
    v_star = train_optimal(train_x, train_y, config.loss, config.ridge)
    fmap = _build_map(config, train_x.shape[1])
    mode = _build_mode(config, train_x, train_y)
    evaluator = _Evaluator(v_star, train_x, train_y, test_x, test_y,
                           config.loss, classification)
    return v_star, fmap, mode, evaluator


def _run_loop(config, teacher, remote, evaluator, iterations=None,
              switch_at=None):
    """Shared teaching loop: metrics row at t=0, then per-period rows.

    switch_at maps iteration index -> replacement teacher (used by the
    multi-teacher runner); each incoming teacher is primed so its
    background exam cost lands on the ledger at the handoff.
    """
    total = config.iterations if iterations is None else iterations
    rows = [evaluator.row(0, remote)]
    completed = 0
    for t in range(1, total + 1):
        if switch_at and (t - 1) in switch_at:
            teacher = switch_at[t - 1]
            teacher.prime(remote)
        if evaluator.distance(remote) <= config.stop_tol:
            break
        sel = teacher.step(remote)
        if sel is None:
            break
        completed = t
        if t % config.metrics_period == 0:
            rows.append(evaluator.row(t, remote))
    if rows[-1].iteration != completed:
        rows.append(evaluator.row(completed, remote))
    return rows


def run_experiment(config):
    """Run one teaching experiment and return its evaluation trace."""
    v_star, fmap, mode, evaluator = _prepare(config)
    spectral = None
    if config.teacher in ("active", "lazy") or config.lam > 0:
        from .feature_space import spectral_stats
        spectral = spectral_stats(fmap)
    learner = _initial_learner(config, fmap)
    remote = RemoteLearner(learner, fmap)
    teacher = _make_teacher(config.teacher, config, v_star, mode, spectral)
    return _run_loop(config, teacher, remote, evaluator)


def run_forgetting_scenario(config, sigma_forget):
    """Compare the four teachers on one forgetting student.

    Shared-space setting only.  All four runs share the dataset, target,
    initial weights, and the per-step forgetting noise (noise at step t
    is a function of (seed, t) only); they differ solely in how examples
    are chosen.  The active teacher re-examines every iteration, which is
    what lets it track the drifting student; the lazy teacher exams once
    and extrapolates blindly.
    """
    if config.map_kind != "identity":
        raise ValueError("forgetting scenario requires the shared-space "
                         "setting (map_kind identity)")
    if isinstance(sigma_forget, ForgettingConfig):
        sigma, noise_seed = sigma_forget.sigma, sigma_forget.seed
    else:
        sigma, noise_seed = float(sigma_forget), config.noise_seed
    if sigma < 0:
        raise ValueError(f"sigma_forget must be >= 0, got {sigma}")
    base = replace(config, sigma_forget=sigma, noise_seed=noise_seed,
                   recovery=replace(config.recovery, standard_queries=True))
    v_star, fmap, mode, evaluator = _prepare(base)
    from .feature_space import spectral_stats
    spectral = spectral_stats(fmap)
    traces = {}
    for kind in TEACHER_KINDS:
        cfg = replace(base, teacher=kind,
                      exam_period=1 if kind == "active" else base.exam_period)
        learner = _initial_learner(cfg, fmap)
        remote = RemoteLearner(learner, fmap)
        teacher = _make_teacher(kind, cfg, v_star, mode, spectral)
        traces[kind] = _run_loop(cfg, teacher, remote, evaluator)
    return traces


def run_multi_teacher(config, n_teachers, switch_points):
    """One student taught by a relay of active teachers.

    switch_points (one per handoff, strictly increasing, within the
    iteration budget) give the iteration counts at which the next teacher
    takes over; every incoming teacher pays for its own background exam.
    """
    if n_teachers < 1:
        raise ValueError(f"n_teachers must be >= 1, got {n_teachers}")
    points = [int(p) for p in switch_points]
    if len(points) != n_teachers - 1:
        raise ValueError(
            f"expected {n_teachers - 1} switch points for {n_teachers} "
            f"teachers, got {len(points)}")
    if any(p < 0 or p > config.iterations for p in points):
        raise ValueError("switch points must lie within the iteration "
                         "budget")
    if any(b <= a for a, b in zip(points, points[1:])):
        raise ValueError("switch points must be strictly increasing")
    cfg = replace(config, teacher="active")
    v_star, fmap, mode, evaluator = _prepare(cfg)
    from .feature_space import spectral_stats
    spectral = spectral_stats(fmap)
    learner = _initial_learner(cfg, fmap)
    remote = RemoteLearner(learner, fmap)
    teachers = [_make_teacher("active", cfg, v_star, mode, spectral)
                for _ in range(n_teachers)]
    teachers[0].prime(remote)
    switch_at = {p: teachers[i + 1] for i, p in enumerate(points)}
    return _run_loop(cfg, teachers[0], remote, evaluator,
                     switch_at=switch_at)


def exponential_fit(rows):
    """Fit param_dist ~ C * rate^iteration by least squares in log space.

    Rows at or below 1e-12 are excluded (they sit on the noise floor);
    at least 10 usable rows are required.
    """
    pts = [(r.iteration, r.param_dist) for r in rows if r.param_dist > 1e-12]
    if len(pts) < 10:
        raise ValueError(
            f"need at least 10 rows above the floor to fit, got {len(pts)}")
    xs = np.array([p[0] for p in pts], dtype=np.float64)
    ys = np.log(np.array([p[1] for p in pts], dtype=np.float64))
    slope, intercept = np.polyfit(xs, ys, 1)
    pred = slope * xs + intercept
    rmse = float(np.sqrt(np.mean((ys - pred) ** 2)))
    return ExponentialFit(rate=float(np.exp(slope)), log_rmse=rmse,
                          n_points=len(pts))


def samples_to_threshold(rows, fraction=0.1):
    """Teaching samples spent when param_dist first drops to the given
    fraction of its initial value; None if the trace never gets there."""
    if not rows:
        raise ValueError("empty trace")
    target = fraction * rows[0].param_dist
    for row in rows:
        if row.param_dist <= target:
            return row.teaching_samples
    return None


_TRACE_COLUMNS = ("iteration", "objective", "param_dist", "test_accuracy",
                  "teaching_samples", "query_samples")


def write_trace(path, rows):
    """Write a trace as delimited text, 17 significant digits per float."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_TRACE_COLUMNS)
        for r in rows:
            acc = "" if r.test_accuracy is None else f"{r.test_accuracy:.17g}"
            writer.writerow([str(r.iteration), f"{r.objective:.17g}",
                             f"{r.param_dist:.17g}", acc,
                             str(r.teaching_samples),
                             str(r.query_samples)])


def read_trace(path):
    """Read a trace file written by write_trace (floats bit-equal)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise TraceFormatError(f"{path}: empty trace file")
        if header != _TRACE_COLUMNS:
            raise TraceFormatError(
                f"{path}: header {header} != expected {_TRACE_COLUMNS}")
        rows = []
        for r, raw in enumerate(reader, start=2):
            if len(raw) != len(_TRACE_COLUMNS):
                raise TraceFormatError(
                    f"{path}: row {r} has {len(raw)} fields, expected "
                    f"{len(_TRACE_COLUMNS)}")
            try:
                rows.append(TraceRow(
                    iteration=int(raw[0]),
                    objective=float(raw[1]),
                    param_dist=float(raw[2]),
                    test_accuracy=None if raw[3] == "" else float(raw[3]),
                    teaching_samples=int(raw[4]),
                    query_samples=int(raw[5])))
            except ValueError as exc:
                raise TraceFormatError(
                    f"{path}: row {r}: {exc}") from None
    return rows
