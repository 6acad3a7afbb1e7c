"""Gradient boosting multiclase con objetivo regularizado de segundo orden.

Cada ronda ajusta un árbol de regresión por clase sobre el gradiente (g) y el hessiano (h)
de la entropía cruzada softmax. El regularizador de cada árbol es gamma·T + ½·lambda·‖w‖²:
- peso de hoja:      w = -G / (H + lambda)
- ganancia de corte: ½ [GL²/(HL+λ) + GR²/(HR+λ) - (GL+GR)²/(HL+HR+λ)] - γ

La búsqueda de cortes es exacta y consciente de la dispersión: las entradas ausentes
(valor cero) van a una dirección por defecto aprendida evaluando ambas rutas.
"""
from __future__ import annotations
import json
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from src.domain.errors import (
    CorruptPayloadError, DegenerateLeafError, DimensionMismatchError,
    EmptyTrainingSetError, SingleClassTrainingError, VersionMismatchError,
)
from src.domain.models import Leaf, SparseVector, Split, SplitInfo, TreeNode
from src.domain.schemas import ClassWeighting, TrainConfig

log = logging.getLogger(__name__)

GBDT_FORMAT_VERSION = "gbdt-1"
HESSIAN_FLOOR = 1e-16
PROBA_FLOOR = 1e-15
LOG_EVERY = 10


# ---------- Objetivo ----------
class GradHess(NamedTuple):
    g: np.ndarray
    h: np.ndarray


def softmax(margins: np.ndarray) -> np.ndarray:
    """Softmax sobre el último eje, restando el máximo para evitar overflow."""
    m = np.asarray(margins, dtype=np.float64)
    z = np.exp(m - m.max(axis=-1, keepdims=True))
    return z / z.sum(axis=-1, keepdims=True)


def grad_hess_softmax(probs: np.ndarray, true_class, weight=1.0) -> GradHess:
    """g_k = w·(p_k - 1[k=y]),  h_k = max(w·p_k·(1-p_k), 1e-16).

    Acepta un vector de probabilidades (true_class entero) o una matriz n×K
    (true_class y weight como arreglos de longitud n).
    """
    p = np.asarray(probs, dtype=np.float64)
    y = np.asarray(true_class)
    w = np.asarray(weight, dtype=np.float64)
    onehot = np.zeros_like(p)
    if p.ndim == 1:
        onehot[int(y)] = 1.0
    else:
        onehot[np.arange(p.shape[0]), y] = 1.0
        w = w[:, None] if w.ndim == 1 else w
    g = w * (p - onehot)
    h = np.maximum(w * p * (1.0 - p), HESSIAN_FLOOR)
    return GradHess(g, h)


def leaf_weight(G: float, H: float, reg_lambda: float) -> float:
    denom = H + reg_lambda
    if denom == 0:
        raise DegenerateLeafError(f"H + lambda = 0 (G={G})")
    return -G / denom


def split_gain(GL, HL, GR, HR, reg_lambda, gamma):
    """Ganancia de segundo orden; acepta escalares o arreglos de numpy."""
    return 0.5 * (
        GL * GL / (HL + reg_lambda)
        + GR * GR / (HR + reg_lambda)
        - (GL + GR) * (GL + GR) / (HL + HR + reg_lambda)
    ) - gamma


def multiclass_log_loss(probs: np.ndarray, labels: np.ndarray) -> float:
    p = probs[np.arange(len(labels)), labels]
    return float(np.mean(-np.log(np.maximum(p, PROBA_FLOOR))))


# ---------- Almacén por columnas ----------
class SparseColumns:
    """Entradas no nulas agrupadas por columna y ordenadas por (valor, fila).

    Un nodo del árbol trabaja sobre una vista restringida a sus filas; el orden
    relativo de las entradas se conserva al restringir.
    """

    __slots__ = ("rows", "values", "features", "n_rows", "n_features")

    def __init__(self, rows: np.ndarray, values: np.ndarray, features: np.ndarray,
                 n_rows: int, n_features: int):
        self.rows = rows
        self.values = values
        self.features = features
        self.n_rows = n_rows
        self.n_features = n_features

    @classmethod
    def from_vectors(cls, vectors: Sequence[SparseVector], n_features: int) -> "SparseColumns":
        rows: List[int] = []
        cols: List[int] = []
        vals: List[float] = []
        for r, vec in enumerate(vectors):
            for c, v in zip(vec.indices, vec.values):
                if c >= n_features:
                    raise DimensionMismatchError(f"índice {c} >= dimensión {n_features} (fila {r})")
                rows.append(r)
                cols.append(c)
                vals.append(v)
        rows_a = np.asarray(rows, dtype=np.int64)
        cols_a = np.asarray(cols, dtype=np.int64)
        vals_a = np.asarray(vals, dtype=np.float64)
        order = np.lexsort((rows_a, vals_a, cols_a))
        return cls(rows_a[order], vals_a[order], cols_a[order], len(vectors), n_features)

    @classmethod
    def from_dense(cls, matrix: np.ndarray) -> "SparseColumns":
        m = np.asarray(matrix, dtype=np.float64)
        vectors = [SparseVector.from_dict({j: v for j, v in enumerate(row) if v != 0.0}) for row in m]
        return cls.from_vectors(vectors, m.shape[1])

    def restrict(self, instances: np.ndarray) -> "SparseColumns":
        member = np.zeros(self.n_rows, dtype=bool)
        member[instances] = True
        keep = member[self.rows]
        return SparseColumns(self.rows[keep], self.values[keep], self.features[keep],
                             self.n_rows, self.n_features)


# ---------- Búsqueda de cortes ----------
def _segment_cumsum(x: np.ndarray, seg_start: np.ndarray, seg_len: np.ndarray) -> np.ndarray:
    """Suma acumulada inclusiva que reinicia al inicio de cada segmento."""
    out = np.empty_like(x)
    for length in np.unique(seg_len):
        idx = seg_start[seg_len == length][:, None] + np.arange(length)
        out[idx] = np.cumsum(x[idx], axis=1)
    return out


def find_best_split(node_instances: np.ndarray, features: SparseColumns, grad: np.ndarray,
                    hess: np.ndarray, config: TrainConfig) -> Optional[SplitInfo]:
    """Búsqueda voraz exacta sobre todas las (feature, umbral, dirección por defecto).

    Umbrales candidatos por feature: puntos medios entre valores presentes distintos y
    consecutivos y, si hay filas ausentes en el nodo, un umbral bajo el menor valor
    presente v0 (v0 - |v0|/2). Los valores presentes < umbral van a la izquierda.
    Empates: menor feature, menor umbral, default_left=True primero.
    """
    node = np.asarray(node_instances, dtype=np.int64)
    if node.size == 0:
        return None
    cols = features.restrict(node)
    if cols.rows.size == 0:
        return None

    lam, gamma, mcw = config.reg_lambda, config.gamma, config.min_child_weight
    G = float(grad[node].sum())
    H = float(hess[node].sum())
    n_node = node.size

    f = cols.features
    v = cols.values
    g = grad[cols.rows]
    h = hess[cols.rows]

    # segmentos por feature
    seg_start = np.flatnonzero(np.r_[True, f[1:] != f[:-1]])
    seg_end = np.r_[seg_start[1:], f.size]
    seg_feat = f[seg_start]
    seg_len = seg_end - seg_start

    # sumas acumuladas que reinician en cada feature: columnas iguales, sumas iguales
    cg = _segment_cumsum(g, seg_start, seg_len)
    ch = _segment_cumsum(h, seg_start, seg_len)
    # totales presentes por feature
    seg_G = cg[seg_end - 1]
    seg_H = ch[seg_end - 1]
    n_missing = n_node - seg_len
    miss_G = np.where(n_missing > 0, G - seg_G, 0.0)
    miss_H = np.where(n_missing > 0, H - seg_H, 0.0)
    seg_id = np.repeat(np.arange(seg_start.size), seg_len)

    # candidatos de punto medio: posición i con f[i] == f[i-1] y v[i] != v[i-1]
    mid = np.flatnonzero((f[1:] == f[:-1]) & (v[1:] != v[:-1])) + 1
    mid_seg = seg_id[mid]
    mid_GL = cg[mid - 1]
    mid_HL = ch[mid - 1]
    mid_thr = (v[mid - 1] + v[mid]) * 0.5

    # candidato frontera: todas las presentes a la derecha
    bnd_seg = np.flatnonzero(n_missing > 0)
    v0 = v[seg_start[bnd_seg]]
    bnd_thr = v0 - np.abs(v0) / 2

    cand_seg = np.r_[bnd_seg, mid_seg]
    if cand_seg.size == 0:
        return None
    cand_GLp = np.r_[np.zeros(bnd_seg.size), mid_GL]
    cand_HLp = np.r_[np.zeros(bnd_seg.size), mid_HL]
    cand_thr = np.r_[bnd_thr, mid_thr]
    cand_pos = np.r_[seg_start[bnd_seg] - 1, mid]  # frontera antes que cualquier punto medio

    # orden total: (feature, posición en el segmento) == (feature, umbral)
    order = np.lexsort((cand_pos, seg_feat[cand_seg]))
    cand_seg, cand_GLp, cand_HLp, cand_thr = cand_seg[order], cand_GLp[order], cand_HLp[order], cand_thr[order]

    GRp = seg_G[cand_seg] - cand_GLp
    HRp = seg_H[cand_seg] - cand_HLp
    mG = miss_G[cand_seg]
    mH = miss_H[cand_seg]

    # columna 0: ausentes a la izquierda; columna 1: ausentes a la derecha
    GL = np.stack([cand_GLp + mG, cand_GLp], axis=1)
    HL = np.stack([cand_HLp + mH, cand_HLp], axis=1)
    GR = np.stack([GRp, GRp + mG], axis=1)
    HR = np.stack([HRp, HRp + mH], axis=1)

    with np.errstate(divide="ignore", invalid="ignore"):
        gains = split_gain(GL, HL, GR, HR, lam, gamma)
    valid = (HL >= mcw) & (HR >= mcw) & (gains > 0)
    if not valid.any():
        return None
    scored = np.where(valid, gains, -np.inf).ravel()
    best = int(np.argmax(scored))  # primera ocurrencia == desempate total
    row, col = divmod(best, 2)
    return SplitInfo(
        feature=int(seg_feat[cand_seg[row]]),
        threshold=float(cand_thr[row]),
        default_left=(col == 0),
        gain=float(scored[best]),
    )


def _goes_left(node: np.ndarray, cols: SparseColumns, split: SplitInfo) -> np.ndarray:
    """Máscara (alineada con node) de filas que van al hijo izquierdo."""
    left = np.full(node.size, split.default_left, dtype=bool)
    sel = cols.features == split.feature
    rows = cols.rows[sel]
    pos = np.searchsorted(node, rows)
    left[pos] = cols.values[sel] < split.threshold
    return left


def build_tree(instances: np.ndarray, features: SparseColumns, grad: np.ndarray,
               hess: np.ndarray, config: TrainConfig, depth: int = 0) -> TreeNode:
    node = np.sort(np.asarray(instances, dtype=np.int64))
    split = None
    if depth < config.max_depth:
        split = find_best_split(node, features, grad, hess, config)
    if split is None:
        G = float(grad[node].sum())
        H = float(hess[node].sum())
        return Leaf(config.learning_rate * leaf_weight(G, H, config.reg_lambda))

    cols = features.restrict(node)
    mask = _goes_left(node, cols, split)
    left = build_tree(node[mask], cols, grad, hess, config, depth + 1)
    right = build_tree(node[~mask], cols, grad, hess, config, depth + 1)
    return Split(split.feature, split.threshold, split.default_left, split.gain, left, right)


def tree_depth(node: TreeNode) -> int:
    if isinstance(node, Leaf):
        return 0
    return 1 + max(tree_depth(node.left), tree_depth(node.right))


def tree_value(node: TreeNode, lookup: Dict[int, float]) -> float:
    while isinstance(node, Split):
        value = lookup.get(node.feature)
        if value is None:
            node = node.left if node.default_left else node.right
        else:
            node = node.left if value < node.threshold else node.right
    return node.weight


# ---------- Modelo ----------
@dataclass(frozen=True)
class GbdtModel:
    n_classes: int
    feature_dim: int
    base_score: Tuple[float, ...]
    rounds: Tuple[Tuple[TreeNode, ...], ...]
    config: TrainConfig
    # pérdida inicial seguida de la pérdida tras cada ronda
    loss_history: Tuple[float, ...] = field(default=())


def _class_weights(labels: np.ndarray, n_classes: int, scheme: ClassWeighting) -> np.ndarray:
    if scheme is ClassWeighting.NONE:
        return np.ones(labels.size, dtype=np.float64)
    counts = np.bincount(labels, minlength=n_classes).astype(np.float64)
    per_class = np.divide(labels.size, n_classes * counts, out=np.zeros(n_classes), where=counts > 0)
    return per_class[labels]


def train(train_vectors: Sequence[SparseVector], labels: Sequence[int], config: TrainConfig,
          *, n_classes: int = 3, feature_dim: Optional[int] = None) -> GbdtModel:
    if len(train_vectors) == 0:
        raise EmptyTrainingSetError("No hay instancias de entrenamiento")
    if len(train_vectors) != len(labels):
        raise DimensionMismatchError(
            f"{len(train_vectors)} vectores pero {len(labels)} etiquetas"
        )
    y = np.asarray(labels, dtype=np.int64)
    if y.min() < 0 or y.max() >= n_classes:
        raise DimensionMismatchError(f"etiquetas fuera de 0..{n_classes - 1}")
    if np.unique(y).size < 2:
        raise SingleClassTrainingError("Se necesitan al menos 2 clases distintas para entrenar")
    if feature_dim is None:
        feature_dim = 1 + max((max(v.indices) for v in train_vectors if len(v)), default=-1)
    columns = SparseColumns.from_vectors(train_vectors, feature_dim)
    lookups = [v.as_dict() for v in train_vectors]

    n = len(train_vectors)
    weights = _class_weights(y, n_classes, config.class_weighting)
    base = np.zeros(n_classes, dtype=np.float64)
    margins = np.tile(base, (n, 1))
    everyone = np.arange(n, dtype=np.int64)

    history = [multiclass_log_loss(softmax(margins), y)]
    rounds: List[Tuple[TreeNode, ...]] = []
    started = time.perf_counter()
    log.info("[GBDT] inicio: n=%d clases=%d dim=%d rondas=%d pérdida_inicial=%.6f",
             n, n_classes, feature_dim, config.n_rounds, history[0])

    for t in range(config.n_rounds):
        gh = grad_hess_softmax(softmax(margins), y, weights)
        trees = tuple(
            build_tree(everyone, columns, gh.g[:, k], gh.h[:, k], config)
            for k in range(n_classes)
        )
        for k, tree in enumerate(trees):
            margins[:, k] += np.array([tree_value(tree, lk) for lk in lookups])
        rounds.append(trees)
        history.append(multiclass_log_loss(softmax(margins), y))
        if (t + 1) % LOG_EVERY == 0 or t + 1 == config.n_rounds:
            log.info("[GBDT] ronda %d/%d pérdida=%.6f", t + 1, config.n_rounds, history[-1])

    log.info("[GBDT] fin en %.2fs", time.perf_counter() - started)
    return GbdtModel(
        n_classes=n_classes,
        feature_dim=feature_dim,
        base_score=tuple(float(b) for b in base),
        rounds=tuple(rounds),
        config=config,
        loss_history=tuple(history),
    )


# ---------- Predicción ----------
def predict_margin(model: GbdtModel, vector: SparseVector) -> np.ndarray:
    if len(vector) and max(vector.indices) >= model.feature_dim:
        raise DimensionMismatchError(
            f"índice {max(vector.indices)} fuera de la dimensión {model.feature_dim}"
        )
    lookup = vector.as_dict()
    margins = np.array(model.base_score, dtype=np.float64)
    for trees in model.rounds:
        for k, tree in enumerate(trees):
            margins[k] += tree_value(tree, lookup)
    return margins


def predict_proba(model: GbdtModel, vector: SparseVector) -> np.ndarray:
    return softmax(predict_margin(model, vector))


def predict_label(model: GbdtModel, vector: SparseVector) -> int:
    # argmax devuelve el primer máximo (desempate por menor índice)
    return int(np.argmax(predict_margin(model, vector)))


# ---------- Importancia ----------
def feature_importance(model: GbdtModel, kind: str = "gain") -> np.ndarray:
    if kind not in ("gain", "weight"):
        raise ValueError(f"Tipo de importancia desconocido: {kind}")
    scores = np.zeros(model.feature_dim, dtype=np.float64)
    stack: List[TreeNode] = [tree for trees in model.rounds for tree in trees]
    while stack:
        node = stack.pop()
        if isinstance(node, Split):
            scores[node.feature] += node.gain if kind == "gain" else 1.0
            stack.extend((node.left, node.right))
    return scores


# ---------- Serialización ----------
def _tree_to_list(node: TreeNode) -> list:
    if isinstance(node, Leaf):
        return [node.weight]
    return [node.feature, node.threshold, node.default_left, node.gain,
            _tree_to_list(node.left), _tree_to_list(node.right)]


def _tree_from_list(data: Any, feature_dim: int) -> TreeNode:
    if not isinstance(data, list):
        raise CorruptPayloadError("nodo de árbol inválido")
    if len(data) == 1:
        return Leaf(float(data[0]))
    if len(data) != 6:
        raise CorruptPayloadError(f"nodo de árbol con {len(data)} elementos")
    feature, threshold, default_left, gain, left, right = data
    if not isinstance(feature, int) or not 0 <= feature < feature_dim or not isinstance(default_left, bool):
        raise CorruptPayloadError(f"nodo de árbol inválido: feature={feature!r}")
    return Split(feature, float(threshold), default_left, float(gain),
                 _tree_from_list(left, feature_dim), _tree_from_list(right, feature_dim))


def model_to_payload(model: GbdtModel) -> Dict[str, Any]:
    return {
        "format_version": GBDT_FORMAT_VERSION,
        "n_classes": model.n_classes,
        "feature_dim": model.feature_dim,
        "base_score": list(model.base_score),
        "config": model.config.model_dump(mode="json", by_alias=True),
        "loss_history": list(model.loss_history),
        "rounds": [[_tree_to_list(t) for t in trees] for trees in model.rounds],
    }


def model_from_payload(payload: Any) -> GbdtModel:
    if not isinstance(payload, dict):
        raise CorruptPayloadError("payload gbdt no es un objeto")
    version = payload.get("format_version")
    if version != GBDT_FORMAT_VERSION:
        raise VersionMismatchError(f"versión gbdt {version!r} != {GBDT_FORMAT_VERSION!r}")
    try:
        n_classes = int(payload["n_classes"])
        feature_dim = int(payload["feature_dim"])
        base = tuple(float(b) for b in payload["base_score"])
        config = TrainConfig.model_validate(payload["config"])
        history = tuple(float(x) for x in payload.get("loss_history", []))
        rounds = tuple(
            tuple(_tree_from_list(t, feature_dim) for t in trees) for trees in payload["rounds"]
        )
    except CorruptPayloadError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise CorruptPayloadError(f"payload gbdt inválido: {e}") from e
    if len(base) != n_classes or any(len(trees) != n_classes for trees in rounds):
        raise CorruptPayloadError("número de clases inconsistente en el payload gbdt")
    if len(rounds) > config.n_rounds:
        raise CorruptPayloadError("más rondas que config.n_rounds")
    return GbdtModel(n_classes, feature_dim, base, rounds, config, history)


def serialize_model(model: GbdtModel) -> bytes:
    return json.dumps(model_to_payload(model), ensure_ascii=False).encode("utf-8")


def deserialize_model(data: bytes) -> GbdtModel:
    try:
        payload = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CorruptPayloadError(f"payload gbdt ilegible: {e}") from e
    return model_from_payload(payload)
