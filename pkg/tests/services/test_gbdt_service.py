import json
import math

import numpy as np
import pytest

from src.domain.errors import (
    CorruptPayloadError, DegenerateLeafError, DimensionMismatchError,
    EmptyTrainingSetError, SingleClassTrainingError, VersionMismatchError,
)
from src.domain.models import Leaf, SparseVector, Split
from src.domain.schemas import ClassWeighting, TrainConfig
from src.services import gbdt_service as svc


# --- Fixtures de Datos ---

def _separable(n0=7, n1=7, n2=6):
    vectors = [SparseVector.from_dict({0: 1.0})] * n0 + [SparseVector.from_dict({1: 1.0})] * n1 \
        + [SparseVector()] * n2
    labels = [0] * n0 + [1] * n1 + [2] * n2
    return vectors, labels


def _random_vectors(rng, n, dim, density=0.4):
    out = []
    for _ in range(n):
        mask = rng.random(dim) < density
        out.append(SparseVector.from_dict({j: float(rng.normal()) for j in np.flatnonzero(mask)}))
    return out


def _loss(margins, y):
    return -math.log(svc.softmax(np.asarray(margins))[y])


def _brute_force(X, g, h, config):
    """Enumera (feature, umbral, default) en el orden de desempate y conserva el primer máximo."""
    best = None
    for f in range(X.shape[1]):
        col = X[:, f]
        present = col != 0
        values = np.unique(col[present])
        thresholds = []
        if values.size and (~present).any():
            thresholds.append(values[0] - abs(values[0]) / 2)
        thresholds.extend((a + b) * 0.5 for a, b in zip(values[:-1], values[1:]))
        for thr in thresholds:
            for default_left in (True, False):
                left = (present & (col < thr)) | (~present & default_left)
                GL, HL = g[left].sum(), h[left].sum()
                GR, HR = g[~left].sum(), h[~left].sum()
                if HL < config.min_child_weight or HR < config.min_child_weight:
                    continue
                with np.errstate(divide="ignore", invalid="ignore"):
                    gain = svc.split_gain(GL, HL, GR, HR, config.reg_lambda, config.gamma)
                if gain > 0 and (best is None or gain > best[0]):
                    best = (gain, f, thr, default_left)
    return best


# --- Objetivo ---

@pytest.mark.parametrize("margins, expected", [
    ([0.0, 0.0, 0.0], [1 / 3, 1 / 3, 1 / 3]),
    ([math.log(2), 0.0, 0.0], [0.5, 0.25, 0.25]),
])
def test_softmax(margins, expected):
    p = svc.softmax(np.array(margins))
    assert p == pytest.approx(expected, abs=1e-12)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)


def test_softmax_sin_overflow():
    p = svc.softmax(np.array([1000.0, 0.0, 0.0]))
    assert np.all(np.isfinite(p))
    assert p[0] == pytest.approx(1.0)


def test_grad_hess_manual():
    gh = svc.grad_hess_softmax(np.array([0.2, 0.5, 0.3]), 1, 1.0)
    assert gh.g == pytest.approx([0.2, -0.5, 0.3])
    assert gh.h == pytest.approx([0.16, 0.25, 0.21])


def test_grad_hess_one_hot():
    gh = svc.grad_hess_softmax(np.array([0.0, 1.0, 0.0]), 1)
    assert np.all(gh.g == 0.0)
    assert np.all(gh.h == svc.HESSIAN_FLOOR)


def test_grad_hess_matriz_con_pesos():
    probs = np.array([[0.2, 0.5, 0.3], [0.6, 0.2, 0.2]])
    gh = svc.grad_hess_softmax(probs, np.array([1, 0]), np.array([2.0, 1.0]))
    assert gh.g[0] == pytest.approx([0.4, -1.0, 0.6])
    assert gh.g[1] == pytest.approx([-0.4, 0.2, 0.2])
    assert gh.h[0] == pytest.approx([0.32, 0.5, 0.42])


def test_grad_hess_diferencias_finitas():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        m = rng.uniform(-3, 3, size=3)
        y = int(rng.integers(0, 3))
        gh = svc.grad_hess_softmax(svc.softmax(m), y)
        for k in range(3):
            e = np.zeros(3)
            e[k] = 1e-5
            g_num = (_loss(m + e, y) - _loss(m - e, y)) / 2e-5
            assert gh.g[k] == pytest.approx(g_num, abs=1e-6)
            e[k] = 1e-4
            h_num = (_loss(m + e, y) - 2 * _loss(m, y) + _loss(m - e, y)) / 1e-8
            assert gh.h[k] == pytest.approx(h_num, abs=1e-4)


@pytest.mark.parametrize("G, H, lam, expected", [
    (0.0, 3.0, 1.0, 0.0),
    (2.0, 3.0, 1.0, -0.5),
    (-4.0, 1.0, 1.0, 2.0),
])
def test_leaf_weight(G, H, lam, expected):
    assert svc.leaf_weight(G, H, lam) == expected


def test_leaf_weight_degenerado():
    with pytest.raises(DegenerateLeafError):
        svc.leaf_weight(1.0, 0.0, 0.0)


def test_leaf_weight_es_optimo():
    rng = np.random.default_rng(3)
    for _ in range(200):
        G, H, lam = rng.normal(), rng.uniform(0.1, 5), rng.uniform(0, 2)
        w = svc.leaf_weight(G, H, lam)

        def objective(v):
            return G * v + 0.5 * (H + lam) * v * v

        for eps in (1e-3, -1e-3, 0.5, -0.5):
            assert objective(w) <= objective(w + eps)


def test_split_gain():
    assert svc.split_gain(-2, 1, 2, 1, 1, 0) == 2.0
    assert svc.split_gain(0, 1, 0, 1, 1, 0.5) == -0.5


def test_split_gain_lineal_en_gamma():
    base = svc.split_gain(-1.5, 2.0, 0.5, 1.0, 1.0, 0.0)
    assert svc.split_gain(-1.5, 2.0, 0.5, 1.0, 1.0, 0.75) == pytest.approx(base - 0.75, abs=1e-15)


# --- Búsqueda de cortes ---

def test_find_best_split_ejemplo_manual():
    cols = svc.SparseColumns.from_dense(np.array([[0.1], [0.9]]))
    info = svc.find_best_split(np.arange(2), cols, np.array([-1.0, 1.0]), np.array([1.0, 1.0]), TrainConfig())
    assert info.feature == 0
    assert info.threshold == pytest.approx(0.5)
    assert info.default_left is True
    assert info.gain == pytest.approx(0.5)


def test_find_best_split_gradientes_nulos():
    cols = svc.SparseColumns.from_dense(np.array([[0.1, 0.0], [0.9, 2.0], [0.4, 1.0]]))
    info = svc.find_best_split(np.arange(3), cols, np.zeros(3), np.ones(3), TrainConfig())
    assert info is None


def test_find_best_split_sin_entradas():
    cols = svc.SparseColumns.from_vectors([SparseVector(), SparseVector()], 3)
    assert svc.find_best_split(np.arange(2), cols, np.array([-1.0, 1.0]), np.ones(2), TrainConfig()) is None


def test_find_best_split_ausentes_a_la_izquierda():
    # feature 0 presente solo en las filas de gradiente negativo
    X = np.array([[0.0], [0.0], [0.7], [0.7]])
    cols = svc.SparseColumns.from_dense(X)
    config = TrainConfig(min_child_weight=0.0)
    info = svc.find_best_split(np.arange(4), cols, np.array([1.0, 1.0, -1.0, -1.0]), np.ones(4), config)
    assert info.feature == 0
    assert info.default_left is True
    assert info.threshold == pytest.approx(0.35)


def test_find_best_split_igual_a_fuerza_bruta():
    rng = np.random.default_rng(12345)
    grid = np.array([0.0, 0.0, 0.25, 0.5, 0.75, 1.0, -0.5])
    checked = 0
    for trial in range(500):
        n = int(rng.integers(1, 9))
        d = int(rng.integers(1, 5))
        X = rng.choice(grid, size=(n, d))
        # valores diádicos: las sumas son exactas en cualquier orden
        g = rng.integers(-8, 9, size=n) * 0.25
        h = rng.integers(1, 9, size=n) * 0.25
        config = TrainConfig(
            reg_lambda=float(rng.choice([0.0, 1.0, 2.0])),
            gamma=float(rng.choice([0.0, 0.25])),
            min_child_weight=float(rng.choice([0.0, 0.5, 1.0])),
        )
        node = np.arange(n)
        if trial % 3 == 0 and n > 2:
            node = np.sort(rng.choice(n, size=n - 1, replace=False))

        cols = svc.SparseColumns.from_dense(X)
        got = svc.find_best_split(node, cols, g, h, config)
        expected = _brute_force(X[node], g[node], h[node], config)
        if expected is None:
            assert got is None
        else:
            checked += 1
            gain, feature, threshold, default_left = expected
            assert (got.feature, got.threshold, got.default_left) == (feature, threshold, default_left)
            assert got.gain == gain
    assert checked > 50


def test_find_best_split_columnas_duplicadas_gana_la_menor():
    # dos términos que siempre aparecen juntos: columnas TF-IDF idénticas, valores no diádicos
    rng = np.random.default_rng(2024)
    checked = 0
    for _ in range(300):
        n = int(rng.integers(4, 30))
        col = np.where(rng.random(n) < 0.5, 0.0, rng.random(n))
        g = rng.normal(size=n)
        h = rng.uniform(0.1, 1.0, size=n)
        config = TrainConfig(min_child_weight=0.0)
        single = svc.find_best_split(np.arange(n), svc.SparseColumns.from_dense(col[:, None]), g, h, config)
        pair = svc.find_best_split(np.arange(n), svc.SparseColumns.from_dense(np.column_stack([col, col])),
                                   g, h, config)
        if single is None:
            assert pair is None
            continue
        checked += 1
        assert pair == single
        assert pair.feature == 0
    assert checked > 100


def test_find_best_split_duplicada_tras_otra_feature():
    rng = np.random.default_rng(7)
    for _ in range(100):
        n = 20
        col = np.where(rng.random(n) < 0.5, 0.0, rng.random(n))
        noise = np.where(rng.random(n) < 0.8, 0.0, rng.random(n))
        X = np.column_stack([noise, col, col])
        info = svc.find_best_split(np.arange(n), svc.SparseColumns.from_dense(X), rng.normal(size=n),
                                   rng.uniform(0.1, 1.0, size=n), TrainConfig(min_child_weight=0.0))
        assert info is None or info.feature != 2


# --- Árboles ---

def test_build_tree_profundidad_uno():
    cols = svc.SparseColumns.from_dense(np.array([[0.1], [0.9]]))
    config = TrainConfig(max_depth=1, learning_rate=0.1)
    tree = svc.build_tree(np.arange(2), cols, np.array([-1.0, 1.0]), np.array([1.0, 1.0]), config)
    assert isinstance(tree, Split)
    assert tree.left.weight == pytest.approx(0.05)
    assert tree.right.weight == pytest.approx(-0.05)


def test_build_tree_gradientes_nulos():
    cols = svc.SparseColumns.from_dense(np.array([[0.1], [0.9], [0.0]]))
    tree = svc.build_tree(np.arange(3), cols, np.zeros(3), np.ones(3), TrainConfig())
    assert isinstance(tree, Leaf) and tree.weight == 0.0


def test_build_tree_respeta_max_depth():
    rng = np.random.default_rng(5)
    for max_depth in (1, 2, 3):
        vectors = _random_vectors(rng, 40, 6)
        labels = list(rng.integers(0, 3, size=40))
        labels[:3] = [0, 1, 2]
        model = svc.train(vectors, labels, TrainConfig(n_rounds=3, max_depth=max_depth, min_child_weight=0.0),
                          feature_dim=6)
        for trees in model.rounds:
            for tree in trees:
                assert svc.tree_depth(tree) <= max_depth


# --- Entrenamiento ---

def test_train_separable():
    vectors, labels = _separable()
    model = svc.train(vectors, labels, TrainConfig(n_rounds=50), feature_dim=2)
    assert [svc.predict_label(model, v) for v in vectors] == labels
    history = model.loss_history
    assert len(history) == 51
    assert history[0] == pytest.approx(math.log(3))
    assert all(b <= a for a, b in zip(history, history[1:]))
    assert history[-1] < history[0]


def test_train_estructura_del_modelo():
    vectors, labels = _separable()
    config = TrainConfig(n_rounds=4)
    model = svc.train(vectors, labels, config, feature_dim=2)
    assert model.n_classes == 3 and model.feature_dim == 2
    assert model.base_score == (0.0, 0.0, 0.0)
    assert len(model.rounds) <= config.n_rounds
    assert all(len(trees) == 3 for trees in model.rounds)


def test_train_balanceado():
    vectors, labels = _separable(n0=12, n1=4, n2=4)
    model = svc.train(vectors, labels, TrainConfig(n_rounds=20, class_weighting=ClassWeighting.BALANCED),
                      feature_dim=2)
    assert [svc.predict_label(model, v) for v in vectors] == labels


def test_train_errores():
    vectors, labels = _separable()
    with pytest.raises(EmptyTrainingSetError):
        svc.train([], [], TrainConfig())
    with pytest.raises(SingleClassTrainingError):
        svc.train(vectors[:5], [0] * 5, TrainConfig(n_rounds=1))
    with pytest.raises(DimensionMismatchError):
        svc.train(vectors, labels[:-1], TrainConfig())
    with pytest.raises(DimensionMismatchError):
        svc.train(vectors, labels, TrainConfig(), feature_dim=1)


def test_train_determinista():
    rng = np.random.default_rng(9)
    vectors = _random_vectors(rng, 30, 5)
    labels = [i % 3 for i in range(30)]
    config = TrainConfig(n_rounds=5, min_child_weight=0.0)
    a = svc.serialize_model(svc.train(vectors, labels, config, feature_dim=5))
    b = svc.serialize_model(svc.train(vectors, labels, config, feature_dim=5))
    assert a == b


def _leaf_weights(node):
    if isinstance(node, Leaf):
        return [node.weight]
    return _leaf_weights(node.left) + _leaf_weights(node.right)


def test_shrinkage_lineal():
    vectors, labels = _separable()
    slow = svc.train(vectors, labels, TrainConfig(n_rounds=1, learning_rate=0.1), feature_dim=2)
    fast = svc.train(vectors, labels, TrainConfig(n_rounds=1, learning_rate=0.2), feature_dim=2)
    for a, b in zip(slow.rounds[0], fast.rounds[0]):
        assert [2 * w for w in _leaf_weights(a)] == _leaf_weights(b)


# --- Predicción ---

def test_predict_consistente():
    vectors, labels = _separable()
    model = svc.train(vectors, labels, TrainConfig(n_rounds=5), feature_dim=2)
    rng = np.random.default_rng(1)
    for vec in _random_vectors(rng, 50, 2):
        margins = svc.predict_margin(model, vec)
        proba = svc.predict_proba(model, vec)
        assert proba.sum() == pytest.approx(1.0, abs=1e-12)
        assert svc.predict_label(model, vec) == int(np.argmax(proba)) == int(np.argmax(margins))


def test_predict_modelo_sin_rondas_uniforme():
    model = svc.GbdtModel(3, 2, (0.0, 0.0, 0.0), (), TrainConfig())
    assert svc.predict_proba(model, SparseVector()) == pytest.approx([1 / 3] * 3)
    assert svc.predict_label(model, SparseVector()) == 0


def test_predict_arbol_manual():
    tree = Split(0, 0.5, True, 1.0, Leaf(0.25), Leaf(-0.5))
    model = svc.GbdtModel(3, 2, (0.0, 0.0, 0.0), ((tree, Leaf(0.0), Leaf(0.1)),), TrainConfig())
    assert list(svc.predict_margin(model, SparseVector())) == [0.25, 0.0, 0.1]
    assert list(svc.predict_margin(model, SparseVector.from_dict({0: 0.3}))) == [0.25, 0.0, 0.1]
    assert list(svc.predict_margin(model, SparseVector.from_dict({0: 0.9}))) == [-0.5, 0.0, 0.1]


def test_predict_dimension_invalida():
    model = svc.GbdtModel(3, 2, (0.0, 0.0, 0.0), (), TrainConfig())
    with pytest.raises(DimensionMismatchError):
        svc.predict_margin(model, SparseVector.from_dict({2: 1.0}))


# --- Importancia ---

def test_feature_importance():
    tree = Split(1, 0.5, True, 2.0, Leaf(0.1), Split(1, 0.8, False, 0.5, Leaf(0.0), Leaf(0.2)))
    model = svc.GbdtModel(3, 3, (0.0, 0.0, 0.0), ((tree, Leaf(0.0), Leaf(0.0)),), TrainConfig())
    assert list(svc.feature_importance(model, "weight")) == [0.0, 2.0, 0.0]
    assert list(svc.feature_importance(model, "gain")) == [0.0, 2.5, 0.0]
    with pytest.raises(ValueError):
        svc.feature_importance(model, "cover")


# --- Serialización ---

def test_serializacion_ida_y_vuelta():
    rng = np.random.default_rng(21)
    vectors = _random_vectors(rng, 40, 6)
    labels = [i % 3 for i in range(40)]
    model = svc.train(vectors, labels, TrainConfig(n_rounds=4, min_child_weight=0.0), feature_dim=6)
    restored = svc.deserialize_model(svc.serialize_model(model))
    assert restored.rounds == model.rounds
    assert restored.config == model.config
    for vec in _random_vectors(rng, 100, 6):
        assert np.array_equal(svc.predict_margin(restored, vec), svc.predict_margin(model, vec))


def test_serializacion_usa_alias_lambda():
    vectors, labels = _separable()
    payload = svc.model_to_payload(svc.train(vectors, labels, TrainConfig(n_rounds=1), feature_dim=2))
    assert payload["format_version"] == "gbdt-1"
    assert payload["config"]["lambda"] == 1.0


def test_deserializar_truncado():
    vectors, labels = _separable()
    data = svc.serialize_model(svc.train(vectors, labels, TrainConfig(n_rounds=2), feature_dim=2))
    with pytest.raises(CorruptPayloadError):
        svc.deserialize_model(data[: len(data) // 2])


def test_deserializar_version_desconocida():
    vectors, labels = _separable()
    payload = svc.model_to_payload(svc.train(vectors, labels, TrainConfig(n_rounds=1), feature_dim=2))
    payload["format_version"] = "999"
    with pytest.raises(VersionMismatchError):
        svc.deserialize_model(json.dumps(payload).encode())


def test_deserializar_nodo_invalido():
    vectors, labels = _separable()
    payload = svc.model_to_payload(svc.train(vectors, labels, TrainConfig(n_rounds=1), feature_dim=2))
    payload["rounds"][0][0] = [5, 0.5, True, 1.0, [0.1], [0.2]]
    with pytest.raises(CorruptPayloadError):
        svc.model_from_payload(payload)
