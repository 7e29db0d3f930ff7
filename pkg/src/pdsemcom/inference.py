"""Diagram vectorization, a small numpy MLP classifier, and repeated
2-fold cross-validation.

The vectorization follows the fixed (non-learnable) recipe: tent functions
on a uniform grid over the (birth, persistence) rectangle, persistence-power
weights, and a top-2 permutation-invariant reduction per tent. Degree-0 and
degree-1 points are vectorized separately and concatenated so loop features
are not drowned by component mass. Training runs full-batch ADAM for a
fixed epoch budget; everything is deterministic given the seed.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, ShapeError, TrainingDiverged
from .homology import PersistenceDiagram

N_CLASSES = 3
CHECKPOINT_MAGIC = b"PDSC"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class PerslayConfig:
    """Fixed tent-grid vectorization parameters.

    Tents live at the centers of an n_birth x n_pers grid over the
    [0, box_side] x [0, box_side] (birth, persistence) rectangle; each
    evaluates max(0, bandwidth - ||(b, d - b) - center||_inf). Per diagram
    point the tent vector is scaled by persistence^weight_exponent; the
    top_k largest values per tent across points (zero-padded) form the
    output, so one channel yields top_k * n_tents features.
    """

    n_birth: int = 8
    n_pers: int = 4
    box_side: float = 16.0
    # wide enough that one-cell quantizer displacements (m >= 10 over a
    # 16-unit box) move tent responses only fractionally
    bandwidth: float = 8.0
    weight_exponent: float = 1.0
    top_k: int = 2

    def __post_init__(self):
        if self.n_birth < 1 or self.n_pers < 1:
            raise ValueError("tent grid must have at least one cell per axis")
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        if self.top_k < 1:
            raise ValueError("top_k must be at least 1")

    @property
    def n_tents(self) -> int:
        return self.n_birth * self.n_pers

    @property
    def features_per_channel(self) -> int:
        return self.top_k * self.n_tents

    @property
    def output_dim(self) -> int:
        """Two channels (degree 0 and degree 1) concatenated."""
        return 2 * self.features_per_channel

    def centers(self) -> np.ndarray:
        """(n_tents, 2) tent centers in (birth, persistence) coordinates."""
        wb = self.box_side / self.n_birth
        wp = self.box_side / self.n_pers
        b = (np.arange(self.n_birth) + 0.5) * wb
        p = (np.arange(self.n_pers) + 0.5) * wp
        bb, pp = np.meshgrid(b, p, indexing="ij")
        return np.column_stack([bb.ravel(), pp.ravel()])


def _channel_features(config: PerslayConfig, points: np.ndarray) -> np.ndarray:
    """Top-k reduction of weighted tent evaluations for one channel."""
    k = config.top_k
    n = config.n_tents
    if len(points) == 0:
        return np.zeros(k * n)
    birth = points[:, 0]
    pers = points[:, 1] - points[:, 0]
    centers = config.centers()
    d_inf = np.maximum(
        np.abs(birth[:, None] - centers[None, :, 0]),
        np.abs(pers[:, None] - centers[None, :, 1]),
    )
    tents = np.maximum(0.0, config.bandwidth - d_inf)
    weighted = (pers ** config.weight_exponent)[:, None] * tents
    if len(points) < k:
        weighted = np.vstack([weighted, np.zeros((k - len(points), n))])
    # descending sort per tent, keep the k largest
    top = -np.sort(-weighted, axis=0)[:k]
    return top.reshape(-1)


def perslay_vectorize(config: PerslayConfig,
                      diagram: PersistenceDiagram) -> np.ndarray:
    """Permutation-invariant feature vector; empty channels map to zeros."""
    return np.concatenate([
        _channel_features(config, diagram.points(0)),
        _channel_features(config, diagram.points(1)),
    ])


def rasterize_raw(points: np.ndarray, box_side: float = 28.0,
                  partition: int = 28) -> np.ndarray:
    """Binary occupancy raster of a point set, flattened x-bin major."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    out = np.zeros(partition * partition)
    if len(pts) == 0:
        return out
    if np.any(pts < 0) or np.any(pts > box_side):
        from .errors import OutOfBox
        bad = pts[np.any((pts < 0) | (pts > box_side), axis=1)][0]
        raise OutOfBox(f"point {tuple(bad)} outside [0, {box_side}]^2")
    w = box_side / partition
    bins = np.minimum(np.floor(pts / w).astype(int), partition - 1)
    out[bins[:, 0] * partition + bins[:, 1]] = 1.0
    return out


class Classifier:
    """Fully connected ReLU network with a softmax head and ADAM state."""

    def __init__(self, layer_sizes, seed: int = 0):
        self.layer_sizes = tuple(int(s) for s in layer_sizes)
        if len(self.layer_sizes) < 2:
            raise ValueError("need at least input and output layers")
        rng = np.random.Generator(
            np.random.Philox(np.random.SeedSequence(entropy=seed))
        )
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(self.layer_sizes, self.layer_sizes[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            self.weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))
        self.step = 0
        self.moments = None
        self.loss_history = []

    def forward(self, X: np.ndarray):
        """-> (probabilities, per-layer activations for backprop)."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.layer_sizes[0]:
            raise ShapeError(
                f"expected {self.layer_sizes[0]} features, got {X.shape[1]}"
            )
        activations = [X]
        h = X
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ W + b
            h = z if i == len(self.weights) - 1 else np.maximum(z, 0.0)
            activations.append(h)
        logits = activations[-1]
        logits = logits - np.max(logits, axis=1, keepdims=True)
        expz = np.exp(logits)
        probs = expz / np.sum(expz, axis=1, keepdims=True)
        return probs, activations

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return self.forward(X)[0]

    def predict(self, X: np.ndarray) -> np.ndarray:
        """1-based class labels."""
        return np.argmax(self.predict_proba(X), axis=1) + 1


def classify(classifier: Classifier, x: np.ndarray):
    """-> (class label, probability vector) for a single feature vector."""
    probs = classifier.predict_proba(np.asarray(x, dtype=float).reshape(1, -1))[0]
    return int(np.argmax(probs)) + 1, probs


def loss_and_gradients(classifier: Classifier, X: np.ndarray, y_index: np.ndarray):
    """Mean cross-entropy and gradients; exposed for finite-difference checks."""
    probs, acts = classifier.forward(X)
    n = len(X)
    eps = 1e-12
    loss = float(-np.mean(np.log(probs[np.arange(n), y_index] + eps)))
    delta = probs.copy()
    delta[np.arange(n), y_index] -= 1.0
    delta /= n
    grads_w = [None] * len(classifier.weights)
    grads_b = [None] * len(classifier.biases)
    for i in range(len(classifier.weights) - 1, -1, -1):
        grads_w[i] = acts[i].T @ delta
        grads_b[i] = np.sum(delta, axis=0)
        if i > 0:
            delta = (delta @ classifier.weights[i].T) * (acts[i] > 0)
    return loss, grads_w, grads_b


def train_classifier(features: np.ndarray, labels: np.ndarray,
                     hidden_sizes=(64, 32), epochs: int = 300,
                     learning_rate: float = 0.001, beta1: float = 0.9,
                     beta2: float = 0.999, eps: float = 1e-8,
                     seed: int = 0) -> Classifier:
    """Full-batch ADAM on categorical cross-entropy for a fixed budget."""
    X = np.asarray(features, dtype=float)
    labels = np.asarray(labels, dtype=int).ravel()
    if X.ndim != 2 or len(X) != len(labels):
        raise ShapeError("features must be (N, d) aligned with labels")
    present = np.unique(labels)
    for c in range(1, N_CLASSES + 1):
        if c not in present:
            raise ValueError(f"training fold has no example of class {c}")
    y_index = labels - 1

    net = Classifier((X.shape[1], *hidden_sizes, N_CLASSES), seed=seed)
    m_w = [np.zeros_like(W) for W in net.weights]
    v_w = [np.zeros_like(W) for W in net.weights]
    m_b = [np.zeros_like(b) for b in net.biases]
    v_b = [np.zeros_like(b) for b in net.biases]
    for epoch in range(epochs):
        loss, gw, gb = loss_and_gradients(net, X, y_index)
        if not np.isfinite(loss):
            raise TrainingDiverged("loss is not finite", step=epoch)
        net.loss_history.append(loss)
        net.step += 1
        t = net.step
        for i in range(len(net.weights)):
            m_w[i] = beta1 * m_w[i] + (1 - beta1) * gw[i]
            v_w[i] = beta2 * v_w[i] + (1 - beta2) * gw[i] ** 2
            m_hat = m_w[i] / (1 - beta1 ** t)
            v_hat = v_w[i] / (1 - beta2 ** t)
            net.weights[i] -= learning_rate * m_hat / (np.sqrt(v_hat) + eps)
            m_b[i] = beta1 * m_b[i] + (1 - beta1) * gb[i]
            v_b[i] = beta2 * v_b[i] + (1 - beta2) * gb[i] ** 2
            mb_hat = m_b[i] / (1 - beta1 ** t)
            vb_hat = v_b[i] / (1 - beta2 ** t)
            net.biases[i] -= learning_rate * mb_hat / (np.sqrt(vb_hat) + eps)
    net.moments = (m_w, v_w, m_b, v_b)
    return net


def save_checkpoint(path, classifier: Classifier) -> None:
    """Versioned binary layout: magic, version, layer sizes, float64 params."""
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<II", CHECKPOINT_VERSION, len(classifier.layer_sizes)))
        fh.write(struct.pack(f"<{len(classifier.layer_sizes)}I",
                             *classifier.layer_sizes))
        for W, b in zip(classifier.weights, classifier.biases):
            fh.write(np.ascontiguousarray(W, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(b, dtype="<f8").tobytes())


def load_checkpoint(path) -> Classifier:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != CHECKPOINT_MAGIC:
            raise ParseError(f"bad checkpoint magic {magic!r}")
        version, n_layers = struct.unpack("<II", fh.read(8))
        if version != CHECKPOINT_VERSION:
            raise ParseError(f"unsupported checkpoint version {version}")
        sizes = struct.unpack(f"<{n_layers}I", fh.read(4 * n_layers))
        net = Classifier(sizes, seed=0)
        for i, (fan_in, fan_out) in enumerate(zip(sizes, sizes[1:])):
            W = np.frombuffer(fh.read(8 * fan_in * fan_out), dtype="<f8")
            net.weights[i] = W.reshape(fan_in, fan_out).copy()
            b = np.frombuffer(fh.read(8 * fan_out), dtype="<f8")
            net.biases[i] = b.copy()
        trailing = fh.read(1)
        if trailing:
            raise ParseError("checkpoint has trailing bytes")
    return net


@dataclass(frozen=True)
class CvSchedule:
    """T random disjoint half/half partitions of {0..n-1}, seeded."""

    n_objects: int
    T: int = 25
    seed: int = 0
    folds: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.n_objects % 2 != 0:
            raise ValueError("dataset size must be even for half/half folds")
        if self.T < 1:
            raise ValueError("need at least one repetition")
        if not self.folds:
            half = self.n_objects // 2
            folds = []
            for t in range(self.T):
                rng = np.random.Generator(np.random.Philox(
                    np.random.SeedSequence(entropy=self.seed, spawn_key=(t,))
                ))
                perm = rng.permutation(self.n_objects)
                train = np.sort(perm[:half])
                test = np.sort(perm[half:])
                train.setflags(write=False)
                test.setflags(write=False)
                folds.append((train, test))
            object.__setattr__(self, "folds", tuple(folds))

    def schedule_hash(self) -> str:
        import hashlib
        h = hashlib.sha256()
        for train, test in self.folds:
            h.update(train.tobytes())
            h.update(test.tobytes())
        return h.hexdigest()[:12]


@dataclass(frozen=True)
class AccuracyReport:
    """Per-repetition accuracies with their exact mean and spread."""

    per_fold: np.ndarray
    mean: float
    band_low: float
    band_high: float
    std: float

    def __post_init__(self):
        a = np.asarray(self.per_fold, dtype=float).ravel()
        if np.any(a < 0) or np.any(a > 1):
            raise ValueError("accuracies must lie in [0, 1]")
        if abs(self.mean - float(np.mean(a))) > 1e-12:
            raise ValueError("mean must equal the average of per-fold values")
        a.setflags(write=False)
        object.__setattr__(self, "per_fold", a)

    @classmethod
    def from_folds(cls, per_fold) -> "AccuracyReport":
        a = np.asarray(per_fold, dtype=float).ravel()
        return cls(per_fold=a, mean=float(np.mean(a)),
                   band_low=float(np.min(a)), band_high=float(np.max(a)),
                   std=float(np.std(a)))


def evaluate_accuracy(classifier: Classifier, features: np.ndarray,
                      labels: np.ndarray) -> float:
    pred = classifier.predict(features)
    return float(np.mean(pred == np.asarray(labels, dtype=int).ravel()))


def run_cv(clean_features: np.ndarray, labels: np.ndarray,
           schedule: CvSchedule, processed_features: np.ndarray | None = None,
           hidden_sizes=(64, 32), epochs: int = 300,
           learning_rate: float = 0.001, seed: int = 0,
           train_equals_test: bool = False) -> AccuracyReport:
    """Train on clean features per repetition, test on processed ones.

    `processed_features` defaults to the clean matrix (noiseless pipeline);
    `train_equals_test` is the degenerate sanity mode where the test fold is
    the training fold itself.
    """
    X = np.asarray(clean_features, dtype=float)
    labels = np.asarray(labels, dtype=int).ravel()
    P = X if processed_features is None else np.asarray(processed_features, dtype=float)
    if len(X) != schedule.n_objects or len(P) != schedule.n_objects:
        raise ShapeError("feature matrices must cover the whole dataset")
    accs = []
    for t, (train, test) in enumerate(schedule.folds):
        fold_seed = int(np.random.SeedSequence(
            entropy=seed, spawn_key=(t,)).generate_state(1)[0])
        net = train_classifier(X[train], labels[train],
                               hidden_sizes=hidden_sizes, epochs=epochs,
                               learning_rate=learning_rate, seed=fold_seed)
        idx = train if train_equals_test else test
        accs.append(evaluate_accuracy(net, P[idx], labels[idx]))
    return AccuracyReport.from_folds(accs)
