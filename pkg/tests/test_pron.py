import math

import numpy as np
import pytest

from logotree import pron
from logotree.config import RunConfig
from logotree.autodiff import Tensor
from logotree.errors import DataError
from logotree.phono import DatasetSplit, PronEntry, build_scenario
from logotree.pron import (EvalReport, Inventories, PronHead, build_model,
                           evaluate, grid_search, predict_pron, pron_loss,
                           run_matrix, train)

TOY_CONFIG = RunConfig(encoder="treelstm", hidden=24, d_in=12, batch_size=32,
                       epochs=5, learning_rate=3e-3, dropout=0.0, seed=1)


@pytest.fixture(scope="module")
def toy_split(corpus_module):
    corpus = corpus_module
    return build_scenario(corpus, 1, seed=5, sizes=(64, 16, 16))


@pytest.fixture(scope="module")
def corpus_module():
    from logotree import phono
    from pathlib import Path
    readings = phono.parse_unihan_readings(
        Path(__file__).parent / "data" / "mini_readings.txt")
    entries, _ = phono.build_corpus(readings, seed=7)
    return entries


def scalar_head_oracle(h, weights, biases, order, inventories_sizes):
    """Plain-float chained softmax, one unit at a time."""
    feats = list(h)
    probs = {}
    for unit in order:
        W = weights[unit]
        logits = [sum(W[r][c] * feats[c] for c in range(len(feats)))
                  + biases[unit][r] for r in range(len(W))]
        mx = max(logits)
        exps = [math.exp(v - mx) for v in logits]
        s = sum(exps)
        p = [v / s for v in exps]
        probs[unit] = p
        feats = feats + p
    return probs


def make_inventories():
    return Inventories(onset=["#", "b", "z"], nucleus=["a", "i", "u", "o"],
                       coda=["#", "ng", "p", "t", "k"])


def make_head(rng, embed_dim=6, order="cd_nu_on", bias=True):
    return PronHead.init(embed_dim, make_inventories(), rng, order, bias)


# ---------------------------------------------------------------------------
# head
# ---------------------------------------------------------------------------

def test_predict_distributions_sum_to_one():
    rng = np.random.default_rng(0)
    head = make_head(rng)
    h = Tensor(rng.standard_normal((5, 6)))
    probs = predict_pron(h, head)
    for unit in pron.UNITS:
        np.testing.assert_allclose(probs[unit].data.sum(axis=-1), 1.0, atol=1e-12)


def test_predict_zero_weights_uniform():
    rng = np.random.default_rng(1)
    head = make_head(rng)
    for t in head.weights.values():
        t.data[:] = 0.0
    probs = predict_pron(Tensor(np.ones((1, 6))), head)
    inv = make_inventories()
    for unit in pron.UNITS:
        n = len(inv.classes(unit))
        np.testing.assert_allclose(probs[unit].data, np.full((1, n), 1.0 / n),
                                   atol=1e-15)


@pytest.mark.parametrize("order", ["cd_nu_on", "on_nu_cd"])
def test_predict_matches_scalar_oracle(order):
    rng = np.random.default_rng(2)
    head = make_head(rng, order=order)
    h = rng.standard_normal((1, 6))
    probs = predict_pron(Tensor(h), head)
    weights = {u: head.weights[f"W_{u}"].data.tolist() for u in pron.UNITS}
    biases = {u: head.weights[f"b_{u}"].data.tolist() for u in pron.UNITS}
    oracle = scalar_head_oracle(h[0].tolist(), weights, biases, head.order,
                                None)
    for unit in pron.UNITS:
        np.testing.assert_allclose(probs[unit].data[0], oracle[unit], atol=1e-12)


def test_predict_chain_feeds_probabilities():
    # the second unit's input must include the first unit's distribution
    rng = np.random.default_rng(3)
    head = make_head(rng)
    first = head.order[0]
    h = Tensor(rng.standard_normal((1, 6)))
    base = predict_pron(h, head)
    head.weights[f"b_{first}"].data[0] += 3.0  # skew the first unit only
    shifted = predict_pron(h, head)
    assert np.abs(base[head.order[1]].data - shifted[head.order[1]].data).max() > 1e-9


def test_decoding_invariant_to_positive_logit_scaling():
    rng = np.random.default_rng(4)
    head = make_head(rng, bias=False)
    h = Tensor(rng.standard_normal((8, 6)))
    first = head.order[0]
    before = predict_pron(h, head)[first].data.argmax(axis=-1)
    head.weights[f"W_{first}"].data *= 7.5
    after = predict_pron(h, head)[first].data.argmax(axis=-1)
    np.testing.assert_array_equal(before, after)


# ---------------------------------------------------------------------------
# loss
# ---------------------------------------------------------------------------

def test_loss_perfect_prediction_zero():
    inv = make_inventories()
    target = PronEntry("X", "b", "a", "ng")
    probs = {}
    for unit in pron.UNITS:
        p = np.zeros((1, len(inv.classes(unit))))
        p[0, inv.index(unit, getattr(target, unit))] = 1.0
        probs[unit] = Tensor(p)
    loss = pron_loss(probs, [target], inv)
    assert float(loss.data) == 0.0


def test_loss_uniform_closed_form():
    inv = make_inventories()
    a, b, c = (len(inv.classes(u)) for u in ("coda", "nucleus", "onset"))
    probs = {u: Tensor(np.full((1, len(inv.classes(u))),
                               1.0 / len(inv.classes(u))))
             for u in pron.UNITS}
    loss = pron_loss(probs, [PronEntry("X", "b", "a", "ng")], inv)
    assert float(loss.data) == pytest.approx(math.log(a) + math.log(b) + math.log(c))


def test_loss_matches_direct_recomputation():
    rng = np.random.default_rng(5)
    inv = make_inventories()
    targets = [PronEntry("X", "b", "a", "ng"), PronEntry("Y", "#", "u", "#")]
    probs = {}
    expected = 0.0
    for unit in pron.UNITS:
        z = rng.random((2, len(inv.classes(unit)))) + 0.1
        z /= z.sum(axis=-1, keepdims=True)
        probs[unit] = Tensor(z)
        for k, t in enumerate(targets):
            expected -= math.log(z[k, inv.index(unit, getattr(t, unit))])
    loss = pron_loss(probs, targets, inv)
    assert float(loss.data) == pytest.approx(expected / 2)


def test_loss_rejects_out_of_inventory():
    inv = make_inventories()
    probs = {u: Tensor(np.full((1, len(inv.classes(u))), 0.5)) for u in pron.UNITS}
    with pytest.raises(DataError):
        pron_loss(probs, [PronEntry("X", "q", "a", "ng")], inv)


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def test_eval_report_hand_counted():
    report = EvalReport(n=2, string_errors=1, token_errors=1,
                        unit_errors={"onset": 1, "nucleus": 0, "coda": 0})
    assert report.ter == pytest.approx(100 / 6)  # 16.67%
    assert report.ser == pytest.approx(50.0)


def test_eval_report_all_correct():
    report = EvalReport(n=5, string_errors=0, token_errors=0,
                        unit_errors=dict.fromkeys(pron.UNITS, 0))
    assert report.ser == report.ter == 0.0


def test_evaluate_counts(rule_table, toy_split):
    inv = Inventories.from_entries(toy_split.train)
    model = build_model(TOY_CONFIG, inv, sorted(rule_table.leaf_set))
    report = evaluate(model, toy_split.test, rule_table)
    assert 0 <= report.ter <= 100 and 0 <= report.ser <= 100
    # SER >= every per-unit rate; TER is the mean of the three unit rates
    for unit in pron.UNITS:
        assert report.ser >= report.unit_rate(unit) - 1e-9
    mean_units = sum(report.unit_rate(u) for u in pron.UNITS) / 3
    assert report.ter == pytest.approx(mean_units)
    assert report.ser >= report.ter / 3 - 1e-9


def test_evaluate_rejects_empty(rule_table, toy_split):
    inv = Inventories.from_entries(toy_split.train)
    model = build_model(TOY_CONFIG, inv, sorted(rule_table.leaf_set))
    with pytest.raises(DataError):
        evaluate(model, [], rule_table)


def test_evaluate_is_pure(rule_table, toy_split):
    inv = Inventories.from_entries(toy_split.train)
    model = build_model(TOY_CONFIG, inv, sorted(rule_table.leaf_set))
    r1 = evaluate(model, toy_split.test, rule_table)
    r2 = evaluate(model, toy_split.test, rule_table)
    assert r1 == r2


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

def test_train_zero_learning_rate_keeps_params(rule_table, toy_split):
    config = RunConfig(encoder="treelstm", hidden=8, d_in=6, batch_size=16,
                       epochs=1, learning_rate=0.0, dropout=0.0, seed=2)
    model, _ = train(config, toy_split, rule_table)
    fresh = build_model(config, Inventories.from_entries(toy_split.train),
                        sorted(rule_table.leaf_set))
    for name, t in model.params().items():
        np.testing.assert_array_equal(t.data, fresh.params()[name].data)


def test_train_deterministic_history(rule_table, toy_split):
    config = RunConfig(encoder="treelstm", hidden=8, d_in=6, batch_size=16,
                       epochs=3, learning_rate=3e-3, dropout=0.1, seed=3)
    _, h1 = train(config, toy_split, rule_table)
    _, h2 = train(config, toy_split, rule_table)
    assert h1 == h2


def test_train_loss_decreases(rule_table, toy_split):
    config = RunConfig(encoder="treelstm", hidden=16, d_in=8, batch_size=32,
                       epochs=10, learning_rate=3e-3, dropout=0.0, seed=4)
    _, history = train(config, toy_split, rule_table)
    assert history[-1].train_loss < history[0].train_loss


@pytest.mark.parametrize("lr,dropout", [(1e-2, 0.0), (3e-3, 0.1), (1e-3, 0.3)])
def test_train_loss_decreases_across_grid_and_seeds(rule_table, toy_split,
                                                    lr, dropout):
    # statistical check: a majority of seeds must improve within 10 epochs
    improved = 0
    for seed in (1, 2, 3):
        config = RunConfig(encoder="treelstm", hidden=16, d_in=8,
                           batch_size=32, epochs=10, learning_rate=lr,
                           dropout=dropout, seed=seed)
        _, history = train(config, toy_split, rule_table)
        improved += history[9].train_loss < history[0].train_loss
    assert improved >= 2


@pytest.mark.parametrize("encoder,layers", [("lstm", 1), ("lstm", 2),
                                            ("bilstm", 1), ("cnn", 1)])
def test_train_all_encoders_smoke(rule_table, toy_split, encoder, layers):
    config = RunConfig(encoder=encoder, layers=layers, hidden=8, d_in=6,
                       cnn_filters=8, batch_size=32, epochs=2,
                       learning_rate=3e-3, dropout=0.1, seed=5)
    model, history = train(config, toy_split, rule_table)
    assert len(history) == 2
    assert all(np.isfinite(h.train_loss) for h in history)
    report = evaluate(model, toy_split.test, rule_table)
    assert 0 <= report.ter <= 100


def test_train_empty_partition_rejected(rule_table):
    split = DatasetSplit([], [], [])
    with pytest.raises(DataError):
        train(TOY_CONFIG, split, rule_table)


def test_overfit_small_subset(rule_table, toy_split):
    # capacity check scaled down for the unit suite; the acceptance suite
    # runs the full 64-character version
    split = DatasetSplit(toy_split.train[:16], toy_split.train[:16],
                         toy_split.train[:16], scenario=1, seed=0)
    config = RunConfig(encoder="treelstm", hidden=32, d_in=16, batch_size=16,
                       epochs=150, learning_rate=1e-2, dropout=0.0, seed=6)
    model, history = train(config, split, rule_table)
    assert min(h.val_ter for h in history) == 0.0


# ---------------------------------------------------------------------------
# grid search and matrix
# ---------------------------------------------------------------------------

def test_grid_single_cell(rule_table, toy_split):
    config = RunConfig(encoder="treelstm", hidden=8, d_in=6, batch_size=32,
                       epochs=2, dropout=0.0, seed=7)
    best, table = grid_search(config, toy_split, rule_table,
                              learning_rates=(3e-3,), dropouts=(0.1,))
    assert best.learning_rate == 3e-3
    assert best.dropout == 0.1
    assert len(table) == 1


def test_grid_zero_lr_never_beats_learning_cell(rule_table, toy_split):
    config = RunConfig(encoder="treelstm", hidden=16, d_in=8, batch_size=32,
                       epochs=8, dropout=0.0, seed=8)
    best, table = grid_search(config, toy_split, rule_table,
                              learning_rates=(0.0, 1e-2), dropouts=(0.0,))
    zero_cell = next(r for r in table if r["learning_rate"] == 0.0)
    learn_cell = next(r for r in table if r["learning_rate"] == 1e-2)
    assert learn_cell["dev_TER"] < zero_cell["dev_TER"]
    assert best.learning_rate == 1e-2


def test_matrix_single_cell(rule_table, toy_split, tmp_path):
    config = RunConfig(hidden=8, d_in=6, batch_size=32, epochs=2,
                       learning_rate=3e-3, dropout=0.0, seed=9)
    rows = run_matrix(config, {1: toy_split}, rule_table,
                      encoders=(("treelstm", 1),), scenarios=(1,))
    assert len(rows) == 1
    assert rows[0]["model"] == "treelstm"
    path = tmp_path / "matrix.csv"
    pron.write_matrix_csv(rows, path)
    header = path.read_text(encoding="utf-8").splitlines()[0]
    assert header == "model,scenario,order,ablation,SER,TER,onset,nucleus,coda"


def test_matrix_ablation_two_rows(rule_table, toy_split):
    config = RunConfig(hidden=8, d_in=6, batch_size=32, epochs=2,
                       learning_rate=3e-3, dropout=0.0, seed=10)
    rows = run_matrix(config, {1: toy_split}, rule_table,
                      encoders=(("treelstm", 1),), ablations=(False, True))
    assert [r["ablation"] for r in rows] == ["full", "no-operators"]


def test_linearization_study_rows(rule_table, toy_split):
    config = RunConfig(hidden=8, d_in=6, batch_size=32, epochs=2,
                       dropout=0.0, seed=11)
    rows = pron.linearization_study(config, toy_split, rule_table,
                                    encoders=(("lstm", 1),),
                                    linearizations=("pre", "post"),
                                    learning_rates=(3e-3,), dropouts=(0.0,))
    assert [(r["model"], r["linearization"]) for r in rows] == \
        [("lstm-1", "pre"), ("lstm-1", "post")]
    assert all(0 <= r["dev_TER"] <= 100 for r in rows)


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def test_save_load_roundtrip(rule_table, toy_split, tmp_path):
    config = RunConfig(encoder="treelstm", hidden=8, d_in=6, batch_size=32,
                       epochs=2, learning_rate=3e-3, dropout=0.0, seed=11)
    model, _ = train(config, toy_split, rule_table)
    path = tmp_path / "model.ckpt"
    pron.save_model(path, model)
    loaded = pron.load_model(path)
    r1 = evaluate(model, toy_split.test, rule_table)
    r2 = evaluate(loaded, toy_split.test, rule_table)
    assert r1 == r2
    for name, t in model.params().items():
        np.testing.assert_array_equal(t.data, loaded.params()[name].data)
