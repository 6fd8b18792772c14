import math
from collections import Counter

import numpy as np
import pytest

from logotree import lm
from logotree.config import LmConfig
from logotree.errors import DataError
from logotree.lm import (EOS_TOKEN, EmbeddingCache, build_cache, build_lm,
                         eval_lm, greedy_continue, lm_step, train_lm)

TOY = LmConfig(layer_sizes=(24,), embed_dim=12, batch_size=4, bptt=8,
               epochs=5, learning_rate=5e-3, dropout_input=0.0,
               dropout_hidden=0.0, dropout_output=0.0, seed=1)


def toy_lines(n=40, seed=0):
    """Sentences assembled from a small word list: strong local structure."""
    import random
    words = ["人口", "水火", "山水", "日月", "木林", "田土"]
    rng = random.Random(seed)
    return ["".join(rng.choice(words) for _ in range(4)) for _ in range(n)]


def unigram_entropy_bits(lines):
    """Per-character entropy of the empirical unigram distribution over the
    evaluation stream (EOS openers and closers included)."""
    counts = Counter([EOS_TOKEN])
    for line in lines:
        counts.update(line)
        counts[EOS_TOKEN] += 1
    total = sum(counts.values())
    return -sum(c / total * math.log2(c / total) for c in counts.values())


# ---------------------------------------------------------------------------
# lm_step
# ---------------------------------------------------------------------------

def test_step_zero_output_weights_uniform():
    model = build_lm(TOY, list("ab"))
    model.w_out.data[:] = 0.0
    model.b_out.data[:] = 0.0
    dist, _ = lm_step(["a"], None, model)
    np.testing.assert_allclose(dist, np.full(4, 0.25), atol=1e-15)


def test_step_distribution_sums_to_one():
    model = build_lm(TOY, list("abcd"))
    dist, state = lm_step(["a", "b"], None, model)
    assert dist.sum() == pytest.approx(1.0, abs=1e-12)
    dist2, _ = lm_step(["c"], state, model)
    assert dist2.sum() == pytest.approx(1.0, abs=1e-12)


def test_step_unknown_char_maps_to_unk():
    model = build_lm(TOY, list("ab"))
    d1, _ = lm_step(["z"], None, model)
    d2, _ = lm_step([lm.UNK_TOKEN], None, model)
    np.testing.assert_array_equal(d1, d2)


def test_memorization_greedy_continuation():
    line = "abcdefghijklmnopqrst"  # every character has a unique successor
    config = LmConfig(layer_sizes=(32,), embed_dim=16, batch_size=1, bptt=21,
                      epochs=150, learning_rate=1e-2, dropout_input=0.0,
                      dropout_hidden=0.0, dropout_output=0.0, seed=3)
    model, history = train_lm(config, [line])
    assert history[-1]["train_bpc"] < 0.2
    assert greedy_continue(model, "a", len(line) - 1) == line[1:]


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

def test_train_beats_unigram_entropy():
    lines = toy_lines()
    config = LmConfig(layer_sizes=(32,), embed_dim=16, batch_size=8, bptt=16,
                      epochs=50, learning_rate=5e-3, dropout_input=0.0,
                      dropout_hidden=0.0, dropout_output=0.0, seed=2)
    model, history = train_lm(config, lines)
    bpc, _ = eval_lm(model, lines)
    assert bpc < unigram_entropy_bits(lines)


def test_train_seed_determinism():
    lines = toy_lines(10)
    m1, h1 = train_lm(TOY, lines)
    m2, h2 = train_lm(TOY, lines)
    assert h1 == h2
    for name, t in m1.params().items():
        np.testing.assert_array_equal(t.data, m2.params()[name].data)
    m3, h3 = train_lm(LmConfig(**{**TOY.__dict__, "seed": 9}), lines)
    assert h1 != h3


def test_train_empty_corpus_rejected():
    with pytest.raises(DataError):
        train_lm(TOY, [])


def test_train_monotone_smoke_three_seeds():
    lines = toy_lines(30)
    for seed in (1, 2, 3):
        config = LmConfig(layer_sizes=(24,), embed_dim=12, batch_size=4,
                          bptt=16, epochs=10, learning_rate=5e-3,
                          dropout_input=0.0, dropout_hidden=0.0,
                          dropout_output=0.0, seed=seed)
        _, history = train_lm(config, lines)
        assert history[-1]["train_bpc"] < history[0]["train_bpc"]


def test_train_hierarchical_smoke(rule_table):
    lines = ["河湖海江", "河海湖池", "江池湖海"] * 4
    config = LmConfig(input_kind="hierarchical", layer_sizes=(16,),
                      embed_dim=10, batch_size=2, bptt=8, epochs=6,
                      learning_rate=5e-3, dropout_input=0.0,
                      dropout_hidden=0.0, dropout_output=0.0, seed=4)
    model, history = train_lm(config, lines, rules=rule_table)
    assert all(np.isfinite(h["train_bpc"]) for h in history)
    bpc, ppl = eval_lm(model, lines)
    assert np.isfinite(bpc) and ppl == 2.0 ** bpc


def test_train_validation_keeps_best(rule_table):
    lines = toy_lines(20)
    config = LmConfig(layer_sizes=(16,), embed_dim=8, batch_size=4, bptt=8,
                      epochs=6, learning_rate=5e-3, dropout_input=0.0,
                      dropout_hidden=0.0, dropout_output=0.0, seed=5)
    model, history = train_lm(config, lines, valid_lines=lines[:5])
    best = min(h["valid_bpc"] for h in history)
    bpc, _ = eval_lm(model, lines[:5])
    assert bpc == pytest.approx(best, abs=1e-9)


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def test_uniform_model_bpc_is_log2_vocab():
    # vocabulary of exactly 4: two characters plus EOS and UNK
    model = build_lm(TOY, list("ab"))
    model.w_out.data[:] = 0.0
    model.b_out.data[:] = 0.0
    bpc, ppl = eval_lm(model, ["abab", "ba"])
    assert bpc == pytest.approx(2.0, abs=1e-12)
    assert ppl == pytest.approx(4.0, abs=1e-12)


def test_ppl_exactly_two_to_bpc():
    model = build_lm(TOY, list("abc"))
    bpc, ppl = eval_lm(model, ["abc", "cab"])
    assert ppl == 2.0 ** bpc


def test_eval_empty_rejected():
    model = build_lm(TOY, list("ab"))
    with pytest.raises(DataError):
        eval_lm(model, [])


# ---------------------------------------------------------------------------
# cache
# ---------------------------------------------------------------------------

def hier_model(rule_table, seed=6):
    lines = ["河湖海", "江海湖"]
    config = LmConfig(input_kind="hierarchical", layer_sizes=(12,),
                      embed_dim=8, batch_size=1, bptt=6, epochs=2,
                      learning_rate=5e-3, dropout_input=0.0,
                      dropout_hidden=0.0, dropout_output=0.0, seed=seed)
    model, _ = train_lm(config, lines, rules=rule_table)
    return model, lines


def test_cache_matches_fresh_forward(rule_table):
    model, _ = hier_model(rule_table)
    cache = build_cache(model)
    import logotree.encoders as enc
    for ch, vec in cache.vectors.items():
        fresh = enc.treelstm_batch_forward([model.trees[ch]],
                                           model.leaf_embeds, model.tree)
        np.testing.assert_allclose(vec, fresh.data[0], atol=1e-12)


def test_cache_transparent_for_eval(rule_table):
    model, lines = hier_model(rule_table)
    bpc_plain, _ = eval_lm(model, lines)
    bpc_cached, _ = eval_lm(model, lines, cache=build_cache(model))
    assert abs(bpc_plain - bpc_cached) < 1e-9


def test_cache_stale_stamp_triggers_rebuild(rule_table):
    model, _ = hier_model(rule_table)
    cache = build_cache(model)
    assert cache.rebuilds == 1
    _ = cache.lookup(model, next(iter(cache.vectors)))
    assert cache.rebuilds == 1  # fresh stamp, no rebuild
    model.version += 1  # parameter update elsewhere
    _ = cache.lookup(model, next(iter(cache.vectors)))
    assert cache.rebuilds == 2


# ---------------------------------------------------------------------------
# out-of-vocabulary accounting
# ---------------------------------------------------------------------------

def test_oov_stats(rule_table):
    model = build_lm(TOY, list("河湖"))
    stats = lm.oov_stats(model, ["河湖海", "龍蒸"], rules=rule_table)
    assert stats["n_oov"] == 3  # 海, 蒸, 龍
    assert stats["n_oov_composable"] == 2  # 海 and 蒸 decompose; 龍 cannot


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def test_lm_save_load_roundtrip(tmp_path, rule_table):
    model, lines = hier_model(rule_table)
    path = tmp_path / "lm.ckpt"
    lm.save_lm(path, model)
    loaded = lm.load_lm(path, rules=rule_table)
    b1, _ = eval_lm(model, lines)
    b2, _ = eval_lm(loaded, lines)
    assert b1 == pytest.approx(b2, abs=1e-12)
