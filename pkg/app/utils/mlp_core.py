"""Feed-forward SHIP network: rectifier hidden layers, one softmax per profile
segment, cross-entropy loss, analytic backpropagation and Adam updates.

Everything runs in float64 with a fixed reduction order, so a (seed, data,
config) triple always produces the same parameters.
"""
import json
import logging
import struct
from typing import List, Optional, Protocol, Sequence, Tuple

import numpy as np

from app.exceptions import ModelFormatError, ModelShapeError, NetworkError, TrainingError
from app.models.audio import StandardizerStats
from app.models.network import (
    Gradients, MlpConfig, MlpModel, TrainingHistory,
)
from app.models.profiles import SEGMENTS, Ship
from app.utils.audio_cqt import apply_standardizer

logger = logging.getLogger(__name__)

MODEL_MAGIC = b"SHIP-DNN"
MODEL_VERSION = 1
PREDICT_BATCH = 1024


class FrameSet(Protocol):
    def __len__(self) -> int: ...

    def batch(self, positions) -> Tuple[np.ndarray, np.ndarray]: ...


class ArrayFrameSet:
    """In-memory features and targets"""

    def __init__(self, features, targets):
        self.features = np.asarray(features, dtype=np.float64)
        self.targets = np.asarray(targets, dtype=np.float64)
        if len(self.features) != len(self.targets):
            raise NetworkError("features and targets differ in length")

    def __len__(self) -> int:
        return len(self.features)

    def batch(self, positions) -> Tuple[np.ndarray, np.ndarray]:
        positions = np.asarray(positions, dtype=int)
        return self.features[positions], self.targets[positions]


def init_model(config: Optional[MlpConfig] = None, stats: Optional[StandardizerStats] = None) -> MlpModel:
    """He-scaled normal weights, zero biases"""
    config = config or MlpConfig.from_settings()
    rng = np.random.default_rng(config.seed)
    sizes = config.layer_sizes
    weights = [
        rng.standard_normal((n_out, n_in)) * np.sqrt(2.0 / n_in)
        for n_in, n_out in zip(sizes[:-1], sizes[1:])
    ]
    biases = [np.zeros(n_out) for n_out in sizes[1:]]
    model = MlpModel(config=config, weights=weights, biases=biases, stats=stats)
    model.check_shapes()
    return model


def grouped_log_softmax(logits: np.ndarray) -> np.ndarray:
    out = np.empty_like(logits, dtype=np.float64)
    for segment in SEGMENTS:
        part = logits[..., segment]
        shifted = part - part.max(axis=-1, keepdims=True)
        out[..., segment] = shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    return out


def grouped_softmax(logits: np.ndarray) -> np.ndarray:
    out = np.empty_like(logits, dtype=np.float64)
    for segment in SEGMENTS:
        part = logits[..., segment]
        exps = np.exp(part - part.max(axis=-1, keepdims=True))
        out[..., segment] = exps / exps.sum(axis=-1, keepdims=True)
    return out


def _forward_pass(model: MlpModel, features: np.ndarray) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """Layer inputs and pre-activations; the last pre-activation holds the logits"""
    inputs = []
    pre_activations = []
    activation = features
    last = len(model.weights) - 1
    for layer, (weight, bias) in enumerate(zip(model.weights, model.biases)):
        inputs.append(activation)
        z = activation @ weight.T + bias
        pre_activations.append(z)
        if layer < last:
            activation = np.maximum(z, 0.0)
    return inputs, pre_activations


def _check_input(model: MlpModel, features: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=np.float64)
    if features.shape[-1] != model.layer_sizes[0]:
        raise NetworkError(
            f"input has {features.shape[-1]} features, network expects {model.layer_sizes[0]}"
        )
    if not np.all(np.isfinite(features)):
        raise NetworkError("network input contains NaN or infinite values")
    return features


def forward_batch(model: MlpModel, features) -> np.ndarray:
    """Per-segment softmax outputs for standardized features (rows = frames)"""
    features = _check_input(model, features)
    if features.ndim == 1:
        features = features[np.newaxis, :]
    _, pre_activations = _forward_pass(model, features)
    return grouped_softmax(pre_activations[-1])


def forward(model: MlpModel, features) -> Ship:
    features = _check_input(model, features)
    if features.ndim != 1:
        raise NetworkError("forward expects a single feature vector")
    return Ship(values=forward_batch(model, features)[0])


def predict_ships(model: MlpModel, raw_features, batch_size: int = PREDICT_BATCH) -> np.ndarray:
    """Standardize raw context windows with the model's statistics, then forward"""
    raw_features = np.asarray(raw_features, dtype=np.float64)
    outputs = []
    for start in range(0, len(raw_features), batch_size):
        chunk = raw_features[start:start + batch_size]
        if model.stats is not None:
            chunk = apply_standardizer(model.stats, chunk)
        outputs.append(forward_batch(model, chunk))
    if not outputs:
        return np.zeros((0, model.layer_sizes[-1]))
    return np.concatenate(outputs)


def loss(prediction, target) -> float:
    """Summed per-segment cross-entropy; the mean over rows for a batch"""
    p = np.asarray(getattr(prediction, "values", prediction), dtype=np.float64)
    t = np.asarray(getattr(target, "values", target), dtype=np.float64)
    positive = t > 0
    with np.errstate(divide="ignore"):
        terms = np.where(positive, -t * np.log(np.where(positive, p, 1.0)), 0.0)
    per_row = terms.sum(axis=-1)
    return float(np.mean(per_row))


def gradients(model: MlpModel, features, targets) -> Gradients:
    """Exact gradients of the mean batch loss"""
    features = _check_input(model, features)
    targets = np.asarray(targets, dtype=np.float64)
    n = features.shape[0]
    if n == 0:
        raise NetworkError("cannot compute gradients of an empty batch")

    inputs, pre_activations = _forward_pass(model, features)
    log_probs = grouped_log_softmax(pre_activations[-1])
    batch_loss = float(-(targets * log_probs).sum() / n)

    # softmax + cross-entropy per segment: d loss / d logits = p - t
    delta = (np.exp(log_probs) - targets) / n
    weight_grads = [None] * len(model.weights)
    bias_grads = [None] * len(model.biases)
    for layer in reversed(range(len(model.weights))):
        weight_grads[layer] = delta.T @ inputs[layer]
        bias_grads[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ model.weights[layer]) * (pre_activations[layer - 1] > 0)
    return Gradients(weights=weight_grads, biases=bias_grads, loss=batch_loss)


class AdamState:
    """First and second moment estimates, one pair per parameter tensor"""

    def __init__(self, model: MlpModel):
        parameters = model.weights + model.biases
        self.first = [np.zeros_like(p) for p in parameters]
        self.second = [np.zeros_like(p) for p in parameters]


def adam_step(model: MlpModel, grads: Gradients, state: AdamState, step_count: int) -> MlpModel:
    """Bias-corrected Adam update applied in place; returns ``model``"""
    if step_count < 1:
        raise NetworkError("Adam step count starts at 1")
    adam = model.config.adam
    correction1 = 1.0 - adam.beta1 ** step_count
    correction2 = 1.0 - adam.beta2 ** step_count
    parameters = model.weights + model.biases
    grad_list = grads.weights + grads.biases
    for param, grad, first, second in zip(parameters, grad_list, state.first, state.second):
        first *= adam.beta1
        first += (1.0 - adam.beta1) * grad
        second *= adam.beta2
        second += (1.0 - adam.beta2) * grad * grad
        param -= adam.learning_rate * (first / correction1) / (np.sqrt(second / correction2) + adam.epsilon)
    return model


def segment_accuracy(predictions: np.ndarray, targets: np.ndarray) -> float:
    """Mean over frames of the fraction of segments whose argmax matches"""
    predictions = np.atleast_2d(predictions)
    targets = np.atleast_2d(targets)
    if predictions.shape[0] == 0:
        raise NetworkError("cannot score an empty set")
    hits = np.zeros(predictions.shape[0])
    for segment in SEGMENTS:
        hits += np.argmax(predictions[:, segment], axis=1) == np.argmax(targets[:, segment], axis=1)
    return float(np.mean(hits / len(SEGMENTS)))


def validation_accuracy(model: MlpModel, frames: FrameSet, batch_size: int = PREDICT_BATCH) -> float:
    if len(frames) == 0:
        raise NetworkError("validation set is empty")
    predictions = []
    targets = []
    for start in range(0, len(frames), batch_size):
        features, target = frames.batch(np.arange(start, min(start + batch_size, len(frames))))
        predictions.append(forward_batch(model, features))
        targets.append(target)
    return segment_accuracy(np.concatenate(predictions), np.concatenate(targets))


def train(
    train_set: FrameSet,
    val_set: FrameSet,
    config: Optional[MlpConfig] = None,
    stats: Optional[StandardizerStats] = None,
    monitor=None,
) -> MlpModel:
    """Mini-batch Adam with early stopping on validation accuracy

    Returns the parameters of the best validation epoch with the full history.
    """
    config = config or MlpConfig.from_settings()
    if len(train_set) == 0 or len(val_set) == 0:
        raise TrainingError("training and validation sets must be non-empty")

    model = init_model(config, stats)
    state = AdamState(model)
    rng = np.random.default_rng([config.seed, 1])
    history = TrainingHistory()
    best_accuracy = -np.inf
    best_weights, best_biases = None, None
    epochs_without_gain = 0
    step = 0
    n = len(train_set)

    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(n)
        total_loss = 0.0
        for start in range(0, n, config.batch_size):
            positions = order[start:start + config.batch_size]
            features, targets = train_set.batch(positions)
            grads = gradients(model, features, targets)
            if not np.isfinite(grads.loss):
                raise TrainingError("loss is not finite", epoch=epoch)
            step += 1
            adam_step(model, grads, state, step)
            total_loss += grads.loss * len(positions)

        epoch_loss = total_loss / n
        accuracy = validation_accuracy(model, val_set, config.batch_size)
        history.train_loss.append(epoch_loss)
        history.val_accuracy.append(accuracy)
        logger.info(f"Epoch {epoch}: train_loss={epoch_loss:.6f}, val_accuracy={accuracy:.4f}")
        if monitor is not None:
            monitor.record_epoch(epoch_loss, accuracy)

        if accuracy > best_accuracy + config.improvement_tolerance:
            best_accuracy = accuracy
            best_weights = [w.copy() for w in model.weights]
            best_biases = [b.copy() for b in model.biases]
            history.best_epoch = epoch
            epochs_without_gain = 0
        else:
            epochs_without_gain += 1
            if epochs_without_gain >= config.patience_epochs:
                history.stopped_early = True
                logger.info(f"Early stopping after epoch {epoch}, best epoch {history.best_epoch}")
                break

    return model.model_copy(update={
        "weights": best_weights,
        "biases": best_biases,
        "history": history,
    })


def history_log(history: TrainingHistory) -> str:
    lines = ["epoch\ttrain_loss\tval_accuracy"]
    for epoch, (epoch_loss, accuracy) in enumerate(zip(history.train_loss, history.val_accuracy), start=1):
        lines.append(f"{epoch}\t{epoch_loss!r}\t{accuracy!r}")
    return "\n".join(lines) + "\n"


def serialize_model(model: MlpModel) -> bytes:
    """Binary model file: magic, version, JSON metadata, layer sizes, stats, tensors"""
    try:
        model.check_shapes()
    except ValueError as e:
        raise ModelShapeError(str(e)) from e
    sizes = model.layer_sizes
    meta = json.dumps(
        {
            "config": model.config.model_dump(mode="json"),
            "history": model.history.model_dump(mode="json"),
        },
        sort_keys=True,
    ).encode("utf-8")
    parts = [
        MODEL_MAGIC,
        struct.pack("<I", MODEL_VERSION),
        struct.pack("<I", len(meta)),
        meta,
        struct.pack("<I", len(sizes)),
        struct.pack(f"<{len(sizes)}I", *sizes),
        struct.pack("<B", 1 if model.stats is not None else 0),
    ]
    if model.stats is not None:
        parts.append(model.stats.mean.astype("<f8").tobytes())
        parts.append(model.stats.scale.astype("<f8").tobytes())
    for weight, bias in zip(model.weights, model.biases):
        parts.append(np.ascontiguousarray(weight, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(bias, dtype="<f8").tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            raise ModelFormatError("model file is truncated")
        chunk = self.data[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def floats(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * count), dtype="<f8").astype(np.float64)


def deserialize_model(data: bytes, expected_layer_sizes: Optional[Sequence[int]] = None) -> MlpModel:
    reader = _Reader(data)
    if reader.take(len(MODEL_MAGIC)) != MODEL_MAGIC:
        raise ModelFormatError("not a SHIP network file (bad magic)")
    (version,) = reader.unpack("<I")
    if version != MODEL_VERSION:
        raise ModelFormatError(f"unsupported model format version {version}")
    (meta_length,) = reader.unpack("<I")
    try:
        meta = json.loads(reader.take(meta_length).decode("utf-8"))
        config = MlpConfig(**meta["config"])
        history = TrainingHistory(**meta["history"])
    except (ValueError, KeyError, TypeError) as e:
        raise ModelFormatError(f"corrupt model metadata: {e}") from e

    (n_sizes,) = reader.unpack("<I")
    sizes = list(reader.unpack(f"<{n_sizes}I"))
    if sizes != list(config.layer_sizes):
        raise ModelShapeError(f"layer sizes {sizes} disagree with the stored config {config.layer_sizes}")
    if expected_layer_sizes is not None and sizes != list(expected_layer_sizes):
        raise ModelShapeError(f"model has layer sizes {sizes}, expected {list(expected_layer_sizes)}")

    (has_stats,) = reader.unpack("<B")
    stats = None
    if has_stats:
        mean = reader.floats(sizes[0])
        scale = reader.floats(sizes[0])
        try:
            stats = StandardizerStats(mean=mean, scale=scale)
        except ValueError as e:
            raise ModelFormatError(f"corrupt standardizer statistics: {e}") from e

    weights, biases = [], []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        weights.append(reader.floats(n_in * n_out).reshape(n_out, n_in))
        biases.append(reader.floats(n_out))
    if reader.offset != len(data):
        raise ModelFormatError(f"{len(data) - reader.offset} unexpected trailing bytes")
    for tensor in weights + biases:
        if not np.all(np.isfinite(tensor)):
            raise ModelFormatError("model parameters contain non-finite values")

    return MlpModel(config=config, weights=weights, biases=biases, stats=stats, history=history)
