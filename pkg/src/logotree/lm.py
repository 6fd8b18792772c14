"""Character-level language modeling with lookup or tree-composed embeddings.

The recurrent core is a stacked cell with configurable per-layer sizes.
Input embeddings are either a standard lookup table or hierarchical
embeddings composed by the tree encoder from each character's
decomposition. During training only the embeddings of characters present
in the current batch window are updated; during evaluation hierarchical
embeddings are composed once per character and cached, stamped with the
parameter version.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import autodiff as ad
from . import encoders as enc
from .autodiff import Adam, Tape, Tensor, concat, dropout_mask, matmul, rows, sigmoid, softmax, tanh
from .checkpoint import load_checkpoint, save_checkpoint
from .config import LmConfig, config_to_dict, validate_lm_config
from .errors import ContractError, DataError, IoError, ShapeError
from .ids import RuleTable, decompose, Leaf, UNK_TOKEN

EOS_TOKEN = "<EOS>"


# ---------------------------------------------------------------------------
# stacked recurrent core with per-layer sizes
# ---------------------------------------------------------------------------

@dataclass
class StackedLstm:
    d_in: int
    sizes: tuple[int, ...]
    weights: dict[str, Tensor] = field(default_factory=dict)

    @classmethod
    def init(cls, d_in: int, sizes, rng: np.random.Generator,
             prefix: str = "core") -> "StackedLstm":
        p = cls(d_in, tuple(sizes))
        for layer, size in enumerate(p.sizes):
            ind = d_in if layer == 0 else p.sizes[layer - 1]
            for g in ("i", "f", "o", "c"):
                p.weights[f"L{layer}.Wx_{g}"] = enc._weight(
                    rng, size, ind, f"{prefix}.L{layer}.Wx_{g}")
                p.weights[f"L{layer}.Wh_{g}"] = enc._weight(
                    rng, size, size, f"{prefix}.L{layer}.Wh_{g}")
                p.weights[f"L{layer}.b_{g}"] = Tensor(
                    np.zeros(size), name=f"{prefix}.L{layer}.b_{g}")
        return p

    def params(self) -> dict[str, Tensor]:
        return {t.name: t for t in self.weights.values()}

    def zero_state(self, batch: int) -> list[tuple[Tensor, Tensor]]:
        return [(Tensor(np.zeros((batch, s))), Tensor(np.zeros((batch, s))))
                for s in self.sizes]

    def step(self, x: Tensor, state, hidden_dropout: float = 0.0,
             rng=None, training: bool = False):
        """One timestep through all layers; returns (top output, new state)."""
        new_state = []
        inp = x
        for layer, size in enumerate(self.sizes):
            h, c = state[layer]
            w = self.weights

            def pre(g):
                return (matmul(inp, w[f"L{layer}.Wx_{g}"].T)
                        + matmul(h, w[f"L{layer}.Wh_{g}"].T)
                        + w[f"L{layer}.b_{g}"])

            i = sigmoid(pre("i"))
            f = sigmoid(pre("f"))
            o = sigmoid(pre("o"))
            cand = tanh(pre("c"))
            c_new = f * c + i * cand
            h_new = o * tanh(c_new)
            new_state.append((h_new, c_new))
            inp = h_new
            if training and hidden_dropout > 0.0 and layer < len(self.sizes) - 1:
                inp = inp * dropout_mask(inp.data.shape, hidden_dropout, rng,
                                         training)
        return inp, new_state


# ---------------------------------------------------------------------------
# model
# ---------------------------------------------------------------------------

@dataclass
class LmModel:
    config: LmConfig
    vocab: list[str]
    core: StackedLstm
    w_out: Tensor
    b_out: Tensor
    # standard input path
    lookup: Tensor | None = None
    # hierarchical input path
    tree: enc.TreeLstmParams | None = None
    leaf_embeds: enc.VocabEmbeddings | None = None
    aux: Tensor | None = None  # rows for characters composed by lookup anyway
    trees: dict[str, object] = field(default_factory=dict)
    version: int = 0  # bumped on every optimizer step; stamps caches

    def __post_init__(self):
        self.index = {ch: i for i, ch in enumerate(self.vocab)}

    @property
    def hierarchical(self) -> bool:
        return self.config.input_kind == "hierarchical"

    def params(self) -> dict[str, Tensor]:
        out = {self.w_out.name: self.w_out, self.b_out.name: self.b_out,
               **self.core.params()}
        if self.hierarchical:
            out.update(self.tree.params())
            out.update(self.leaf_embeds.params())
            out[self.aux.name] = self.aux
        else:
            out[self.lookup.name] = self.lookup
        return out

    def char_id(self, ch: str) -> int:
        return self.index.get(ch, self.index[UNK_TOKEN])


def build_lm(config: LmConfig, vocab_chars, rules: RuleTable | None = None
             ) -> LmModel:
    """Assemble a model over the training vocabulary (+ EOS and UNK)."""
    validate_lm_config(config)
    rng = np.random.default_rng(config.seed)
    vocab = sorted(set(vocab_chars) - {EOS_TOKEN, UNK_TOKEN})
    vocab = vocab + [EOS_TOKEN, UNK_TOKEN]
    e = config.embed_dim
    core = StackedLstm.init(e, config.layer_sizes, rng)
    w_out = enc._weight(rng, len(vocab), config.layer_sizes[-1], "out.W")
    b_out = Tensor(np.zeros(len(vocab)), name="out.b")
    model = LmModel(config, vocab, core, w_out, b_out)
    if config.input_kind == "hierarchical":
        if rules is None:
            raise ContractError("hierarchical embeddings need a rule table")
        model.tree = enc.TreeLstmParams.init(e, e, rng,
                                             use_bias=config.tree_bias)
        model.leaf_embeds = enc.VocabEmbeddings(sorted(rules.leaf_set), e, rng,
                                                name="leaf_embeddings")
        model.aux = Tensor(np.random.default_rng(config.seed + 1)
                           .uniform(-0.1, 0.1, (len(vocab), e)), name="aux")
        for ch in vocab:
            if ch not in (EOS_TOKEN, UNK_TOKEN):
                tree = decompose(ch, rules)
                if tree != Leaf(UNK_TOKEN):
                    model.trees[ch] = tree
    else:
        model.lookup = Tensor(rng.uniform(-0.1, 0.1, (len(vocab), e)),
                              name="lookup")
    return model


# ---------------------------------------------------------------------------
# input embedding assembly
# ---------------------------------------------------------------------------

def _window_embeddings(model: LmModel, ids: np.ndarray,
                       cache: "EmbeddingCache | None" = None,
                       rng=None, training: bool = False):
    """Embedding matrix for one (batch, time) id window plus gather indices.

    Hierarchical models compose tree embeddings only for the unique
    characters present in the window; everything else reads the auxiliary
    table. Returns (matrix (U, E), flat gather index (batch*time,), row
    map {vocab id -> matrix row}).
    """
    unique = np.unique(ids)
    if not model.hierarchical:
        flat = np.searchsorted(unique, ids.reshape(-1))
        return rows(model.lookup, unique), flat, {int(v): k for k, v in
                                                  enumerate(unique)}
    composed = [int(v) for v in unique if model.vocab[int(v)] in model.trees]
    plain = [int(v) for v in unique if model.vocab[int(v)] not in model.trees]
    parts = []
    order: list[int] = []
    if composed:
        if cache is not None and not training:
            vecs = [cache.lookup(model, model.vocab[v]) for v in composed]
            parts.append(Tensor(np.stack(vecs)))
        else:
            trees = [model.trees[model.vocab[v]] for v in composed]
            parts.append(enc.treelstm_batch_forward(
                trees, model.leaf_embeds, model.tree,
                input_dropout=model.config.dropout_input if training else 0.0,
                rng=rng, training=training))
        order.extend(composed)
    if plain:
        parts.append(rows(model.aux, np.array(plain, dtype=np.intp)))
        order.extend(plain)
    matrix = parts[0] if len(parts) == 1 else concat(parts, axis=0)
    row_of = {v: k for k, v in enumerate(order)}
    flat = np.array([row_of[int(v)] for v in ids.reshape(-1)], dtype=np.intp)
    return matrix, flat, row_of


def _logits(model: LmModel, h: Tensor) -> Tensor:
    return matmul(h, model.w_out.T) + model.b_out


# ---------------------------------------------------------------------------
# streams
# ---------------------------------------------------------------------------

def read_corpus(path) -> list[str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read corpus {path}: {exc}") from exc
    lines = [line for line in text.splitlines() if line]
    if not lines:
        raise DataError(f"corpus {path} is empty")
    return lines


def stream_ids(model: LmModel, lines: list[str]) -> np.ndarray:
    """Sentence stream with an end-of-sentence symbol closing every line and
    opening the stream (so the first character is predicted too)."""
    eos = model.index[EOS_TOKEN]
    out = [eos]
    for line in lines:
        out.extend(model.char_id(ch) for ch in line)
        out.append(eos)
    return np.array(out, dtype=np.intp)


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

def _detach_state(state):
    return [(Tensor(h.data.copy()), Tensor(c.data.copy())) for h, c in state]


def _embedding_table_names(model: LmModel) -> list[str]:
    if model.hierarchical:
        return [model.leaf_embeds.table.name, model.aux.name]
    return [model.lookup.name]


def train_lm(config: LmConfig, train_lines: list[str],
             valid_lines: list[str] | None = None,
             rules: RuleTable | None = None) -> tuple[LmModel, list[dict]]:
    """Truncated-backpropagation training; per-epoch train BPC recorded.

    Only embedding rows with gradient contributions from the current batch
    window are updated (the shared tree weights always are). With a
    validation corpus, the best-validation parameters are restored at the
    end.
    """
    if not train_lines:
        raise DataError("empty training corpus")
    chars = sorted({ch for line in train_lines for ch in line})
    model = build_lm(config, chars, rules)
    rng = np.random.default_rng(config.seed)
    optimizer = Adam(lr=config.learning_rate)
    params = model.params()
    table_names = set(_embedding_table_names(model))

    stream = stream_ids(model, train_lines)
    B = min(config.batch_size, max(1, (len(stream) - 1) // max(1, config.bptt)))
    L = (len(stream) - 1) // B
    if L < 1:
        raise DataError("corpus too small for the requested batch size")
    inputs = stream[:B * L].reshape(B, L)
    targets = stream[1:B * L + 1].reshape(B, L)

    history: list[dict] = []
    best = None
    for epoch in range(config.epochs):
        state = model.core.zero_state(B)
        nats = 0.0
        count = 0
        for start in range(0, L, config.bptt):
            width = min(config.bptt, L - start)
            window_ids = inputs[:, start:start + width]
            window_tgts = targets[:, start:start + width]
            tape = Tape()
            with tape:
                matrix, flat, _ = _window_embeddings(model, window_ids,
                                                     rng=rng, training=True)
                x_all = rows(matrix, flat)
                if config.dropout_input > 0.0:
                    x_all = x_all * dropout_mask(x_all.data.shape,
                                                 config.dropout_input, rng, True)
                x_all = ad.reshape(x_all, (B, width, config.embed_dim))
                losses = []
                for t in range(width):
                    x_t = ad.reshape(ad.narrow(x_all, 1, t, 1),
                                     (B, config.embed_dim))
                    out, state = model.core.step(x_t, state,
                                                 config.dropout_hidden, rng, True)
                    if config.dropout_output > 0.0:
                        out = out * dropout_mask(out.data.shape,
                                                 config.dropout_output, rng, True)
                    p = softmax(_logits(model, out))
                    onehot = np.zeros_like(p.data)
                    onehot[np.arange(B), window_tgts[:, t]] = 1.0
                    picked = (p * Tensor(onehot)).sum(axis=-1)
                    losses.append(-ad.log(picked).sum())
                loss = losses[0]
                for extra in losses[1:]:
                    loss = loss + extra
                loss = loss * (1.0 / (B * width))
            ad.zero_grads(params.values())
            tape.backward(loss)
            ad.clip_global_norm(params.values(), config.clip_norm)
            sparse = {}
            for name in table_names:
                g = params[name].grad
                if g is not None:
                    touched = np.flatnonzero(np.abs(g).sum(axis=1))
                    sparse[name] = touched
            optimizer.step(params, sparse_rows=sparse)
            model.version += 1
            state = _detach_state(state)
            nats += float(loss.data) * B * width
            count += B * width
        train_bpc = nats / count / math.log(2)
        entry = {"epoch": epoch, "train_bpc": train_bpc}
        if valid_lines:
            bpc, _ = eval_lm(model, valid_lines)
            entry["valid_bpc"] = bpc
            if best is None or bpc < best[0]:
                best = (bpc, {k: t.data.copy() for k, t in params.items()})
        history.append(entry)
    if best is not None:
        for k, t in params.items():
            t.data[:] = best[1][k]
        model.version += 1
    return model, history


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def eval_lm(model: LmModel, lines: list[str],
            cache: "EmbeddingCache | None" = None,
            chunk: int = 256) -> tuple[float, float]:
    """Bits per character over the whole corpus and its perplexity 2**BPC."""
    if not lines:
        raise DataError("empty evaluation corpus")
    stream = stream_ids(model, lines)
    ids = stream[:-1].reshape(1, -1)
    tgts = stream[1:]
    state = model.core.zero_state(1)
    log2_total = 0.0
    n = ids.shape[1]
    for start in range(0, n, chunk):
        width = min(chunk, n - start)
        window = ids[:, start:start + width]
        matrix, flat, _ = _window_embeddings(model, window, cache=cache)
        x_all = ad.reshape(rows(matrix, flat), (1, width, model.config.embed_dim))
        for t in range(width):
            x_t = ad.reshape(ad.narrow(x_all, 1, t, 1), (1, model.config.embed_dim))
            out, state = model.core.step(x_t, state)
            p = softmax(_logits(model, out))
            log2_total += math.log2(float(p.data[0, tgts[start + t]]))
    bpc = -log2_total / n
    return bpc, 2.0 ** bpc


def lm_step(prev_chars, state, model: LmModel,
            cache: "EmbeddingCache | None" = None):
    """Feed characters from the given state; returns (distribution, state).

    ``state`` of None starts from the zero state. The distribution is over
    the model vocabulary and sums to 1.
    """
    if state is None:
        state = model.core.zero_state(1)
    p = None
    for ch in prev_chars:
        window = np.array([[model.char_id(ch)]], dtype=np.intp)
        matrix, flat, _ = _window_embeddings(model, window, cache=cache)
        x = rows(matrix, flat)
        out, state = model.core.step(x, state)
        p = softmax(_logits(model, out))
    if p is None:
        raise ContractError("prev_chars must be non-empty")
    return p.data[0], state


def greedy_continue(model: LmModel, prefix: str, n: int) -> str:
    """Argmax continuation of a prefix; EOS stops generation early."""
    dist, state = lm_step([EOS_TOKEN] + list(prefix), None, model)
    out = []
    for _ in range(n):
        ch = model.vocab[int(np.argmax(dist))]
        if ch == EOS_TOKEN:
            break
        out.append(ch)
        dist, state = lm_step([ch], state, model)
    return "".join(out)


# ---------------------------------------------------------------------------
# embedding cache
# ---------------------------------------------------------------------------

@dataclass
class EmbeddingCache:
    """Composed character embeddings stamped with the parameter version."""

    vectors: dict[str, np.ndarray] = field(default_factory=dict)
    stamp: int = -1
    rebuilds: int = 0

    def lookup(self, model: LmModel, ch: str) -> np.ndarray:
        if self.stamp != model.version:
            self.rebuild(model)
        return self.vectors[ch]

    def rebuild(self, model: LmModel) -> None:
        if not model.hierarchical:
            raise ContractError("cache applies to hierarchical embeddings")
        chars = sorted(model.trees)
        if chars:
            trees = [model.trees[ch] for ch in chars]
            h = enc.treelstm_batch_forward(trees, model.leaf_embeds, model.tree)
            self.vectors = {ch: h.data[k].copy() for k, ch in enumerate(chars)}
        else:
            self.vectors = {}
        self.stamp = model.version
        self.rebuilds += 1


def build_cache(model: LmModel) -> EmbeddingCache:
    """One tree composition per unique character, stamped and reusable until
    the next parameter update."""
    cache = EmbeddingCache()
    cache.rebuild(model)
    return cache


def oov_stats(model: LmModel, lines: list[str],
              rules: RuleTable | None = None) -> dict:
    """How many corpus characters fall outside the training vocabulary, and
    how many of those the hierarchical path can still compose."""
    seen = {ch for line in lines for ch in line}
    oov = {ch for ch in seen if ch not in model.index}
    composable = set()
    if rules is not None:
        composable = {ch for ch in oov
                      if decompose(ch, rules) != Leaf(UNK_TOKEN)}
    return {"n_chars": len(seen), "n_oov": len(oov),
            "n_oov_composable": len(composable)}


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def save_lm(path, model: LmModel) -> None:
    manifest = {
        "kind": "language-model",
        "config": config_to_dict(model.config),
        "vocab": model.vocab,
        "leaf_vocab": model.leaf_embeds.tokens if model.hierarchical else None,
        "tree_chars": sorted(model.trees) if model.hierarchical else None,
    }
    save_checkpoint(path, {k: t.data for k, t in model.params().items()},
                    manifest)


def load_lm(path, rules: RuleTable | None = None) -> LmModel:
    tensors, manifest = load_checkpoint(path)
    if manifest.get("kind") != "language-model":
        raise ContractError(f"{path} is not a language-model checkpoint")
    payload = dict(manifest["config"])
    payload["layer_sizes"] = tuple(payload["layer_sizes"])
    config = LmConfig(**payload)
    vocab_chars = [ch for ch in manifest["vocab"]
                   if ch not in (EOS_TOKEN, UNK_TOKEN)]
    if config.input_kind == "hierarchical" and rules is None:
        raise ContractError("loading a hierarchical model needs the rule table")
    model = build_lm(config, vocab_chars, rules)
    if model.hierarchical:
        model.leaf_embeds = enc.VocabEmbeddings.from_tokens(
            manifest["leaf_vocab"], config.embed_dim, name="leaf_embeddings")
        if sorted(model.trees) != manifest["tree_chars"]:
            raise ContractError(f"{path}: rule table does not reproduce the "
                                "decompositions this model was trained with")
    for name, t in model.params().items():
        if name not in tensors:
            raise ContractError(f"{path}: missing tensor {name}")
        if tensors[name].shape != t.data.shape:
            raise ShapeError(f"{path}: {name} shape mismatch")
        t.data[:] = tensors[name]
    return model
