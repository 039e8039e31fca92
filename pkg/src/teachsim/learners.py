"""Black-box linear students: losses, feedback channels, SGD state.

A student holds a weight vector w in its own feature space and, given a
training pair (x~, y), takes the step w <- w - eta * beta(<w, x~>, y) * x~
where beta is the derivative of the loss in its scalar prediction.  The
outside world only ever sees F(<w, x~>) for a feedback function F; the
weight vector itself stays private.
"""

from dataclasses import dataclass, replace

import numpy as np

from .rng import KEY_FORGET, substream

LOSSES = ("square", "logistic", "hinge")
FEEDBACKS = ("identity", "sigmoid", "sign", "hinge_value")

# Lipschitz constants of beta(z, y) in z, used by step-size window checks.
LIPSCHITZ_SMOOTH = {"square": 1.0, "logistic": 0.25, "hinge": 1.0}

_SIGMOID_CLAMP = 1e-12


class SaturationError(ValueError):
    """Feedback value outside the invertible range of F."""


def _check_loss(loss):
    if loss not in LOSSES:
        raise ValueError(f"unknown loss {loss!r}; expected one of {LOSSES}")


def _check_feedback(kind):
    if kind not in FEEDBACKS:
        raise ValueError(
            f"unknown feedback {kind!r}; expected one of {FEEDBACKS}")


def _check_labels(loss, y):
    if loss in ("logistic", "hinge"):
        y_arr = np.asarray(y)
        if not np.all(np.abs(y_arr) == 1):
            raise ValueError(
                f"{loss} loss needs labels in {{-1, +1}}, got {y!r}")


def _sigmoid(t):
    t = np.asarray(t, dtype=np.float64)
    e = np.exp(-np.abs(t))
    return np.where(t >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def loss_value(loss, z, y):
    """Pointwise loss at scalar prediction z and label y (broadcasts)."""
    _check_loss(loss)
    _check_labels(loss, y)
    z = np.asarray(z, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if loss == "square":
        out = 0.5 * (z - y) ** 2
    elif loss == "logistic":
        out = np.logaddexp(0.0, -y * z)
    else:
        out = np.maximum(1.0 - y * z, 0.0)
    return out if out.ndim else float(out)


def loss_grad(loss, z, y):
    """Derivative of the loss in its prediction argument (beta).

    The hinge derivative at the kink y*z == 1 is taken as 0.
    """
    _check_loss(loss)
    _check_labels(loss, y)
    z = np.asarray(z, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if loss == "square":
        out = z - y
    elif loss == "logistic":
        out = -y * _sigmoid(-y * z)
    else:
        out = np.where(y * z < 1.0, -y, 0.0)
    return out if out.ndim else float(out)


def feedback_value(kind, z):
    """Apply the feedback function F to a scalar prediction (broadcasts)."""
    _check_feedback(kind)
    z = np.asarray(z, dtype=np.float64)
    if kind == "identity":
        out = z + 0.0
    elif kind == "sigmoid":
        out = _sigmoid(z)
    elif kind == "sign":
        out = np.where(z >= 0, 1.0, -1.0)
    else:
        out = np.maximum(z, 0.0)
    return out if out.ndim else float(out)


def feedback_invert(kind, r):
    """Inverse of a bijective feedback function.

    Sigmoid responses are clamped into [1e-12, 1 - 1e-12] first; values at
    or beyond 0/1 mean the learner's predictions have saturated the channel
    and the caller should rescale its queries.
    """
    _check_feedback(kind)
    r = np.asarray(r, dtype=np.float64)
    if kind == "identity":
        out = r + 0.0
    elif kind == "sigmoid":
        if np.any(r <= 0.0) or np.any(r >= 1.0):
            raise SaturationError(
                "sigmoid response at or beyond {0, 1}; rescale queries")
        c = np.clip(r, _SIGMOID_CLAMP, 1.0 - _SIGMOID_CLAMP)
        out = np.log(c) - np.log1p(-c)
    else:
        raise ValueError(f"feedback {kind!r} is not invertible")
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ForgettingConfig:
    """Per-step Gaussian parameter noise, seeded for reproducibility."""
    sigma: float
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")


@dataclass(frozen=True)
class LearnerState:
    """Immutable snapshot of a student; steps return new states."""
    w: np.ndarray
    eta: float
    loss: str
    feedback: str
    sigma_forget: float = 0.0
    seed: int = 0
    t: int = 0

    def __post_init__(self):
        _check_loss(self.loss)
        _check_feedback(self.feedback)
        if self.eta < 0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")
        if self.sigma_forget < 0:
            raise ValueError(
                f"sigma_forget must be >= 0, got {self.sigma_forget}")
        w = np.array(self.w, dtype=np.float64)
        if w.ndim != 1 or not np.all(np.isfinite(w)):
            raise ValueError("w must be a finite 1-D vector")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def dim(self):
        return self.w.shape[0]


def respond(learner, x_tilde):
    """Feedback F(<w, x~>) to a student-space query. Never mutates state."""
    x_tilde = np.asarray(x_tilde, dtype=np.float64)
    if x_tilde.shape != learner.w.shape:
        raise ValueError(
            f"query dimension {x_tilde.shape} != learner dimension "
            f"{learner.w.shape}")
    return feedback_value(learner.feedback, float(learner.w @ x_tilde))


def sgd_step(learner, x_tilde, y):
    """One gradient step on the training pair (x~, y)."""
    x_tilde = np.asarray(x_tilde, dtype=np.float64)
    if x_tilde.shape != learner.w.shape:
        raise ValueError(
            f"example dimension {x_tilde.shape} != learner dimension "
            f"{learner.w.shape}")
    beta = loss_grad(learner.loss, float(learner.w @ x_tilde), y)
    w_new = learner.w - learner.eta * beta * x_tilde
    return replace(learner, w=w_new, t=learner.t + 1)


def forgetting_step(learner, x_tilde, y):
    """Gradient step followed by seeded Gaussian parameter noise.

    With sigma_forget == 0 this is exactly sgd_step (bit-identical).  The
    noise at step t depends only on (seed, t), so two teachers replaying
    the same seed see the same perturbations at the same times.
    """
    stepped = sgd_step(learner, x_tilde, y)
    if learner.sigma_forget == 0.0:
        return stepped
    gen = substream(learner.seed, KEY_FORGET, learner.t)
    noise = gen.normal(0.0, learner.sigma_forget, size=learner.dim)
    return replace(stepped, w=stepped.w + noise)


def training_objective(learner, features, labels):
    """Mean loss of the learner over a student-space dataset."""
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != learner.dim:
        raise ValueError(
            f"features must be (n, {learner.dim}), got {features.shape}")
    if labels.shape != (features.shape[0],):
        raise ValueError("labels must match the number of feature rows")
    z = features @ learner.w
    return float(np.mean(loss_value(learner.loss, z, labels)))
