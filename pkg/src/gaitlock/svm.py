"""Multi-class kernel SVM trained from scratch with an SMO dual solver.

Binary machines solve the soft-margin dual by analytic two-variable
updates on maximal violating pairs, with an endpoint-objective fallback
when the second derivative vanishes. Multi-class classification is
one-vs-one with majority voting over z-score-normalized features.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    DimensionMismatch,
    FormatError,
    NonFinite,
    SingleClass,
    TooFewClasses,
    VersionMismatch,
)

KERNEL_LINEAR = "linear"
KERNEL_POLY = "poly"
KERNEL_RBF = "rbf"
KERNELS = (KERNEL_LINEAR, KERNEL_POLY, KERNEL_RBF)

MODEL_MAGIC = "GAITLOCK-SVM"
MODEL_VERSION = "v1"


@dataclass(frozen=True)
class KernelSpec:
    """Kernel kind plus exactly the parameters that kind requires."""

    kind: str
    c: float
    degree: int | None = None
    sigma: float | None = None

    def __post_init__(self):
        if self.kind not in KERNELS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if not self.c > 0:
            raise ValueError("regularization parameter c must be positive")
        if self.kind == KERNEL_POLY:
            if self.degree is None or int(self.degree) < 1:
                raise ValueError("polynomial kernel needs degree >= 1")
            if self.sigma is not None:
                raise ValueError("polynomial kernel takes no sigma")
            object.__setattr__(self, "degree", int(self.degree))
        elif self.kind == KERNEL_RBF:
            if self.sigma is None or not self.sigma > 0:
                raise ValueError("RBF kernel needs sigma > 0")
            if self.degree is not None:
                raise ValueError("RBF kernel takes no degree")
            object.__setattr__(self, "sigma", float(self.sigma))
        else:
            if self.degree is not None or self.sigma is not None:
                raise ValueError("linear kernel takes neither degree nor sigma")
        object.__setattr__(self, "c", float(self.c))


def kernel_matrix(spec: KernelSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gram matrix K[i, j] = k(a_i, b_j)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatch(f"vector dimensions differ: {a.shape[1]} vs {b.shape[1]}")
    dots = a @ b.T
    if spec.kind == KERNEL_LINEAR:
        return dots
    if spec.kind == KERNEL_POLY:
        return (dots + 1.0) ** spec.degree
    sq = (a * a).sum(axis=1)[:, None] + (b * b).sum(axis=1)[None, :] - 2.0 * dots
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-sq / (2.0 * spec.sigma**2))


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """Single kernel value k(x, y)."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size != y.size:
        raise DimensionMismatch(f"vector dimensions differ: {x.size} vs {y.size}")
    return float(kernel_matrix(spec, x[None, :], y[None, :])[0, 0])


@dataclass
class BinarySvm:
    """One trained two-class machine of the one-vs-one ensemble.

    ``coefficients`` holds alpha_i * y_i for the support vectors; positive
    sign pulls toward class_pair[0], negative toward class_pair[1].
    """

    support_vectors: np.ndarray
    coefficients: np.ndarray
    bias: float
    kernel: KernelSpec
    class_pair: tuple[str, str]

    def decision_many(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if self.support_vectors.size == 0:
            return np.full(x.shape[0], self.bias)
        k = kernel_matrix(self.kernel, x, self.support_vectors)
        return k @ self.coefficients + self.bias

    def decision(self, x) -> float:
        return float(self.decision_many(np.asarray(x, dtype=np.float64)[None, :])[0])


def _validate_binary_input(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.ndim != 2 or x.shape[0] != y.size:
        raise DimensionMismatch("need one label per sample row")
    if not np.isfinite(x).all() or not np.isfinite(y).all():
        raise NonFinite("training data contains NaN or infinity")
    if not np.isin(y, (-1.0, 1.0)).all():
        raise ValueError("binary labels must be -1 or +1")
    if np.unique(y).size < 2:
        raise SingleClass("both labels must be present")
    return x, y


def train_binary(
    x,
    y,
    spec: KernelSpec,
    tol: float = 1e-3,
    max_passes: int = 10,
    class_pair: tuple[str, str] = ("+1", "-1"),
) -> BinarySvm:
    """Solve the soft-margin dual by sequential minimal optimization.

    Each iteration takes an analytic two-variable step on a maximal
    violating pair of the dual gradient (second-order partner choice);
    the bias enters only at the end, as the free-vector average or the
    midpoint of the final gradient band. Training stops once the
    optimality gap closes below ``tol``, which bounds every sample's KKT
    violation by ``tol``. ``max_passes`` scales the iteration budget.
    The solver is fully deterministic.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    x, y = _validate_binary_input(x, y)
    n = x.shape[0]
    c = spec.c
    k = kernel_matrix(spec, x, x)
    alpha = np.zeros(n)
    # f_free[t] = sum_s alpha_s y_s K(s, t): the decision values without bias
    f_free = np.zeros(n)
    snap = 1e-12 * max(1.0, c)  # keep alphas exactly on the box bounds
    tau = 1e-12

    def boxed(value: float) -> float:
        if value < snap:
            return 0.0
        if value > c - snap:
            return c
        return value

    max_iterations = max(5000, 500 * max_passes * n)
    for _ in range(max_iterations):
        scores = y - f_free  # -y * dual gradient, bias-free optimality score
        up = ((y > 0) & (alpha < c)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < c))
        if not up.any() or not low.any():
            break
        up_idx = np.flatnonzero(up)
        low_idx = np.flatnonzero(low)
        i = int(up_idx[np.argmax(scores[up_idx])])
        if scores[i] - scores[low_idx].min() <= tol:
            break
        # partner with the largest analytic objective gain
        cand = low_idx[scores[low_idx] < scores[i]]
        diffs = scores[i] - scores[cand]
        etas = k[i, i] + k[cand, cand] - 2.0 * k[i, cand]
        etas = np.where(etas > tau, etas, tau)
        j = int(cand[np.argmax(diffs * diffs / etas)])

        yi, yj = y[i], y[j]
        s = yi * yj
        ai_old, aj_old = alpha[i], alpha[j]
        if s < 0:
            lo_b = max(0.0, aj_old - ai_old)
            hi_b = min(c, c + aj_old - ai_old)
        else:
            lo_b = max(0.0, ai_old + aj_old - c)
            hi_b = min(c, ai_old + aj_old)
        if lo_b >= hi_b:
            break
        eta = k[i, i] + k[j, j] - 2.0 * k[i, j]
        e_diff = (f_free[i] - yi) - (f_free[j] - yj)
        if eta > tau:
            aj = min(hi_b, max(lo_b, aj_old + yj * e_diff / eta))
        else:
            # flat direction: move to whichever clip end gains dual objective
            best_gain, aj = 0.0, aj_old
            for end in (lo_b, hi_b):
                dj = end - aj_old
                di = -s * dj
                ui, uj = yi * di, yj * dj
                gain = (
                    di
                    + dj
                    - ui * f_free[i]
                    - uj * f_free[j]
                    - 0.5 * (ui * ui * k[i, i] + uj * uj * k[j, j] + 2.0 * ui * uj * k[i, j])
                )
                if gain > best_gain + 1e-15:
                    best_gain, aj = gain, end
            if aj == aj_old:
                break
        aj = boxed(aj)
        ai = boxed(min(c, max(0.0, ai_old + s * (aj_old - aj))))
        if ai == ai_old and aj == aj_old:
            break
        alpha[i], alpha[j] = ai, aj
        f_free += (ai - ai_old) * yi * k[i] + (aj - aj_old) * yj * k[j]

    scores = y - f_free
    up = ((y > 0) & (alpha < c)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < c))
    free = (alpha > 0.0) & (alpha < c)
    if free.any():
        bias = float(scores[free].mean())
    elif up.any() and low.any():
        bias = float((scores[up].max() + scores[low].min()) / 2.0)
    else:
        bias = float(scores.mean())

    support = alpha > 0.0
    return BinarySvm(
        support_vectors=x[support].copy(),
        coefficients=(alpha * y)[support].copy(),
        bias=bias,
        kernel=spec,
        class_pair=class_pair,
    )


@dataclass
class SvmModel:
    """One-vs-one ensemble plus the training normalization statistics."""

    classes: list[str]
    binaries: list[BinarySvm]
    norm_mean: np.ndarray
    norm_std: np.ndarray = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.norm_mean.size

    def normalize(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.norm_mean) / self.norm_std


def train_multiclass(
    x,
    labels,
    spec: KernelSpec,
    tol: float = 1e-3,
    max_passes: int = 10,
) -> SvmModel:
    """Train k(k-1)/2 pairwise machines on z-score-normalized features.

    Labels are coerced to strings so that models survive the text
    round trip unchanged. Zero-variance dimensions pass through unscaled.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatch("feature matrix must be 2-D")
    if not np.isfinite(x).all():
        raise NonFinite("training data contains NaN or infinity")
    labels = [str(lbl) for lbl in labels]
    if len(labels) != x.shape[0]:
        raise DimensionMismatch("need one label per sample row")
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise TooFewClasses(f"need >= 2 classes, got {len(classes)}")
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std > 0.0, std, 1.0)
    z = (x - mean) / std
    label_arr = np.asarray(labels, dtype=object)
    binaries = []
    for i in range(len(classes)):
        for j in range(i + 1, len(classes)):
            pair = (classes[i], classes[j])
            rows = np.flatnonzero((label_arr == pair[0]) | (label_arr == pair[1]))
            y = np.where(label_arr[rows] == pair[0], 1.0, -1.0)
            binaries.append(
                train_binary(z[rows], y, spec, tol=tol, max_passes=max_passes, class_pair=pair)
            )
    return SvmModel(classes=classes, binaries=binaries, norm_mean=mean, norm_std=std)


def predict(model: SvmModel, x) -> str:
    """Majority vote over the pairwise machines.

    Ties go to the tied label with the largest sum of absolute decision
    values over the machines that voted for it, then to class order.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size != model.dimension:
        raise DimensionMismatch(f"expected {model.dimension} features, got {x.size}")
    z = model.normalize(x)
    votes = {cls: 0 for cls in model.classes}
    strength = {cls: 0.0 for cls in model.classes}
    for machine in model.binaries:
        d = machine.decision(z)
        winner = machine.class_pair[0] if d >= 0.0 else machine.class_pair[1]
        votes[winner] += 1
        strength[winner] += abs(d)
    best_votes = max(votes.values())
    tied = [cls for cls in model.classes if votes[cls] == best_votes]
    if len(tied) == 1:
        return tied[0]
    best_strength = max(strength[cls] for cls in tied)
    for cls in tied:
        if strength[cls] == best_strength:
            return cls
    return tied[0]


def predict_many(model: SvmModel, x) -> list[str]:
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    return [predict(model, row) for row in x]


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def save_model(model: SvmModel, path) -> None:
    """Write the versioned plain-text model file."""
    lines = [f"{MODEL_MAGIC} {MODEL_VERSION}"]
    lines.append(f"classes {len(model.classes)}")
    lines.extend(model.classes)
    lines.append(f"normalization {model.dimension}")
    for m, s in zip(model.norm_mean, model.norm_std):
        lines.append(f"{_fmt(m)} {_fmt(s)}")
    lines.append(f"machines {len(model.binaries)}")
    for machine in model.binaries:
        lines.append(f"pair {machine.class_pair[0]} {machine.class_pair[1]}")
        spec = machine.kernel
        if spec.kind == KERNEL_POLY:
            lines.append(f"kernel poly {_fmt(spec.c)} {spec.degree}")
        elif spec.kind == KERNEL_RBF:
            lines.append(f"kernel rbf {_fmt(spec.c)} {_fmt(spec.sigma)}")
        else:
            lines.append(f"kernel linear {_fmt(spec.c)}")
        lines.append(f"bias {_fmt(machine.bias)}")
        n_sv = machine.support_vectors.shape[0]
        dim = model.dimension
        lines.append(f"vectors {n_sv} {dim}")
        for coef, vec in zip(machine.coefficients, machine.support_vectors):
            lines.append(" ".join([_fmt(coef)] + [_fmt(v) for v in vec]))
    lines.append("end")
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


class _LineReader:
    def __init__(self, lines: list[str]):
        self.lines = lines
        self.pos = 0

    def next(self) -> str:
        if self.pos >= len(self.lines):
            raise FormatError("model file is truncated")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def expect(self, keyword: str) -> list[str]:
        parts = self.next().split()
        if not parts or parts[0] != keyword:
            raise FormatError(f"expected '{keyword}' record")
        return parts[1:]


def load_model(path) -> SvmModel:
    """Parse a model file written by :func:`save_model`."""
    text = Path(path).read_text(encoding="ascii", errors="replace")
    reader = _LineReader(text.splitlines())
    header = reader.next().split()
    if len(header) != 2 or header[0] != MODEL_MAGIC:
        raise FormatError("not a gaitlock SVM model file")
    if header[1] != MODEL_VERSION:
        raise VersionMismatch(f"unsupported model version {header[1]!r}")
    try:
        (k_str,) = reader.expect("classes")
        classes = [reader.next() for _ in range(int(k_str))]
        (dim_str,) = reader.expect("normalization")
        dim = int(dim_str)
        mean = np.empty(dim)
        std = np.empty(dim)
        for i in range(dim):
            m_str, s_str = reader.next().split()
            mean[i], std[i] = float(m_str), float(s_str)
        (m_count_str,) = reader.expect("machines")
        binaries = []
        for _ in range(int(m_count_str)):
            pair = reader.expect("pair")
            if len(pair) != 2:
                raise FormatError("pair record needs two labels")
            kparts = reader.expect("kernel")
            kind = kparts[0]
            if kind == KERNEL_LINEAR and len(kparts) == 2:
                spec = KernelSpec(KERNEL_LINEAR, float(kparts[1]))
            elif kind == KERNEL_POLY and len(kparts) == 3:
                spec = KernelSpec(KERNEL_POLY, float(kparts[1]), degree=int(kparts[2]))
            elif kind == KERNEL_RBF and len(kparts) == 3:
                spec = KernelSpec(KERNEL_RBF, float(kparts[1]), sigma=float(kparts[2]))
            else:
                raise FormatError(f"bad kernel record {kparts}")
            (bias_str,) = reader.expect("bias")
            n_sv_str, sv_dim_str = reader.expect("vectors")
            n_sv, sv_dim = int(n_sv_str), int(sv_dim_str)
            if sv_dim != dim:
                raise FormatError("support vector dimension differs from normalization")
            coefs = np.empty(n_sv)
            vecs = np.empty((n_sv, dim))
            for i in range(n_sv):
                parts = reader.next().split()
                if len(parts) != dim + 1:
                    raise FormatError("support vector row has wrong arity")
                coefs[i] = float(parts[0])
                vecs[i] = [float(p) for p in parts[1:]]
            binaries.append(
                BinarySvm(vecs, coefs, float(bias_str), spec, (pair[0], pair[1]))
            )
        if reader.next() != "end":
            raise FormatError("missing end record")
    except (ValueError, IndexError) as exc:
        raise FormatError(f"malformed model file: {exc}") from exc
    return SvmModel(classes=classes, binaries=binaries, norm_mean=mean, norm_std=std)


def kkt_violation(machine: BinarySvm, x, y, atol: float = 1e-9) -> float:
    """Largest KKT violation of a trained machine over its training set.

    ``x`` must be the (normalized) training rows and ``y`` their +/-1
    labels. Alphas are recovered by matching rows against the stored
    support vectors; unmatched rows have alpha = 0. The returned value is
    <= tol exactly when every sample satisfies its KKT condition within
    tol.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    c = machine.kernel.c
    consumed = np.zeros(machine.support_vectors.shape[0], dtype=bool)
    alphas = np.zeros(y.size)
    for i in range(y.size):
        for sv_idx in range(consumed.size):
            if consumed[sv_idx]:
                continue
            coef = machine.coefficients[sv_idx]
            if np.sign(coef) == np.sign(y[i]) and np.array_equal(
                machine.support_vectors[sv_idx], x[i]
            ):
                alphas[i] = abs(coef)
                consumed[sv_idx] = True
                break
    margins = y * machine.decision_many(x)
    worst = -np.inf
    for a, m in zip(alphas, margins):
        if a <= atol:
            worst = max(worst, 1.0 - m)
        elif a >= c - atol:
            worst = max(worst, m - 1.0)
        else:
            worst = max(worst, abs(m - 1.0))
    return float(worst)
