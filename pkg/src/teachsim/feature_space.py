"""Linear maps between the teacher's and the student's feature spaces.

The teacher works in R^d, the student in R^s, connected by a one-to-one
linear map G (a student sees G x where the teacher wrote x).  Everything
downstream leans on two facts: <w, G x> = <G^T w, x>, and the extreme
eigenvalues of G^T G control how fast teaching can contract.  This module
holds the map itself, its spectral summary, and the span geometry used by
combination-style teaching.
"""

import numpy as np

from .rng import KEY_MAP, substream

# Relative eigenvalue cutoff shared by pseudo-inverses and rank decisions.
_RANK_CUTOFF = 1e-10

# A map is treated as conjugate-orthogonal when max|G^T G - I| is below this.
_UNITARY_TOL = 1e-10


def as_vector(x, dim=None):
    """Validate and return a finite 1-D float64 vector."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"expected dimension {dim}, got {v.shape[0]}")
    return v


class FeatureMap:
    """Invertible linear map from teacher space R^d to student space R^s.

    Only square maps (s == d) are supported; the matrix must be far from
    singular (smallest singular value above 1e-10).  ``is_unitary`` records
    that G^T G = I, which lets teachers skip repeated feedback exams.
    """

    def __init__(self, matrix, is_unitary=False):
        m = np.asarray(matrix, dtype=np.float64)
        if m.ndim != 2:
            raise ValueError(f"map matrix must be 2-D, got shape {m.shape}")
        if m.shape[0] != m.shape[1]:
            raise ValueError(
                f"only square maps are supported, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("map matrix has non-finite entries")
        svals = np.linalg.svd(m, compute_uv=False)
        if svals[-1] <= 1e-10:
            raise ValueError(
                f"map is numerically singular (smallest singular value "
                f"{svals[-1]:.3e})")
        if is_unitary:
            dev = np.max(np.abs(m.T @ m - np.eye(m.shape[1])))
            if dev > _UNITARY_TOL:
                raise ValueError(
                    f"matrix flagged unitary but max|G^T G - I| = {dev:.3e}")
        self.matrix = m
        self.matrix.setflags(write=False)
        self.d = m.shape[1]
        self.s = m.shape[0]
        self.is_unitary = bool(is_unitary)

    def __repr__(self):
        tag = "unitary" if self.is_unitary else "general"
        return f"FeatureMap(d={self.d}, {tag})"


def apply_map(fmap, x):
    """Student-space image G x of a teacher-space vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != fmap.d:
        raise ValueError(
            f"map expects dimension {fmap.d}, got {x.shape[-1]}")
    return fmap.matrix @ x


def conjugate_apply(fmap, w):
    """Teacher-space pullback G^T w of a student-space vector.

    Satisfies <w, apply_map(G, x)> = <conjugate_apply(G, w), x>.
    """
    w = np.asarray(w, dtype=np.float64)
    if w.shape[-1] != fmap.s:
        raise ValueError(
            f"conjugate expects dimension {fmap.s}, got {w.shape[-1]}")
    return fmap.matrix.T @ w


class SpectralStats:
    """Extreme eigenvalues of G^T G and their ratio."""

    def __init__(self, sigma_min, sigma_max):
        if not (0 < sigma_min <= sigma_max):
            raise ValueError(
                f"need 0 < sigma_min <= sigma_max, got "
                f"({sigma_min:.3e}, {sigma_max:.3e})")
        self.sigma_min = float(sigma_min)
        self.sigma_max = float(sigma_max)
        self.kappa = float(sigma_max / sigma_min)

    def __repr__(self):
        return (f"SpectralStats(sigma_min={self.sigma_min:.6g}, "
                f"sigma_max={self.sigma_max:.6g}, kappa={self.kappa:.6g})")


def spectral_stats(fmap):
    """Smallest/largest eigenvalue of G^T G (symmetric eigendecomposition)."""
    gram = fmap.matrix.T @ fmap.matrix
    vals = np.linalg.eigvalsh(gram)
    if vals[0] <= 1e-12:
        raise ValueError(
            f"G^T G numerically rank-deficient (min eigenvalue {vals[0]:.3e})")
    return SpectralStats(vals[0], vals[-1])


def random_map(dim, kind, seed):
    """Seeded random feature map.

    kind "unitary": QR orthogonalization of a Gaussian matrix with the
    usual sign fix, so G^T G = I to floating-point accuracy.

    kind "general": Gaussian entries, resampled while the eigenvalue ratio
    of G^T G exceeds 100.  Raw Gaussian matrices essentially never meet
    that bound once dim grows past ~15, so after a few failed draws the
    singular values of the last draw are compressed into a fixed
    well-conditioned range while keeping its (Haar-distributed) singular
    vectors.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    gen = substream(seed, KEY_MAP)
    if kind == "identity":
        return FeatureMap(np.eye(dim), is_unitary=True)
    if kind == "unitary":
        a = gen.standard_normal((dim, dim))
        q, r = np.linalg.qr(a)
        q = q * np.where(np.diag(r) >= 0, 1.0, -1.0)
        return FeatureMap(q, is_unitary=True)
    if kind == "general":
        m = None
        for _ in range(8):
            cand = gen.standard_normal((dim, dim))
            svals = np.linalg.svd(cand, compute_uv=False)
            if svals[-1] > 1e-10 and (svals[0] / svals[-1]) ** 2 <= 100.0:
                m = cand
                break
        if m is None:
            # Compress the spectrum: map singular values affinely onto
            # [s_max/8, s_max], giving kappa = 64 <= 100.
            u, svals, vt = np.linalg.svd(cand)
            top = svals[0]
            lo, hi = svals[-1], svals[0]
            if hi - lo < 1e-12 * top:
                fixed = np.full_like(svals, top)
            else:
                fixed = top / 8.0 + (svals - lo) * (top - top / 8.0) / (hi - lo)
            m = (u * fixed) @ vt
        return FeatureMap(m, is_unitary=False)
    raise ValueError(f"unknown map kind {kind!r}")


class SpanMetric:
    """Geometry induced by the span of a candidate set.

    Holds the orthogonal projector P = D (D^T D)^+ D^T onto span(D) for a
    d x k matrix D whose columns are the candidates.  The pseudo-inverse
    drops eigenvalues of D^T D below 1e-10 times the largest, and the rank
    is the number kept.
    """

    def __init__(self, candidates):
        d_mat = np.asarray(candidates, dtype=np.float64)
        if d_mat.ndim != 2:
            raise ValueError(
                f"candidate matrix must be 2-D, got shape {d_mat.shape}")
        if not np.all(np.isfinite(d_mat)):
            raise ValueError("candidate matrix has non-finite entries")
        gram = d_mat.T @ d_mat
        vals, vecs = np.linalg.eigh(gram)
        top = vals[-1] if vals.size else 0.0
        if top <= 0.0:
            raise ValueError("all candidates are zero vectors")
        keep = vals > _RANK_CUTOFF * top
        inv = np.zeros_like(vals)
        inv[keep] = 1.0 / vals[keep]
        pinv = (vecs * inv) @ vecs.T
        self.candidates = d_mat
        self.projector = d_mat @ pinv @ d_mat.T
        self.projector = 0.5 * (self.projector + self.projector.T)
        self.rank = int(np.count_nonzero(keep))
        self.dim = d_mat.shape[0]

    def __repr__(self):
        return f"SpanMetric(dim={self.dim}, rank={self.rank})"


def span_inner(metric, v1, v2):
    """Span-restricted inner product v1^T P v2."""
    v1 = np.asarray(v1, dtype=np.float64)
    v2 = np.asarray(v2, dtype=np.float64)
    if v1.shape != (metric.dim,) or v2.shape != (metric.dim,):
        raise ValueError(
            f"span_inner expects vectors of dimension {metric.dim}")
    return float(v1 @ metric.projector @ v2)


def span_norm(metric, v):
    """Norm of the projection of v onto the span."""
    val = span_inner(metric, v, v)
    return float(np.sqrt(max(val, 0.0)))


def project_span(metric, v):
    """Orthogonal projection of v onto the candidate span."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (metric.dim,):
        raise ValueError(
            f"project_span expects a vector of dimension {metric.dim}")
    return metric.projector @ v
