"""Logograph encoders: a recursive tree cell plus sequence baselines.

The tree encoder evaluates a gated cell bottom-up over a strictly binary
decomposition tree; the root hidden state is the logograph embedding.
Sequence baselines (unidirectional/bidirectional recurrent nets and a
multi-width convolutional bank) consume linearized trees instead.

Training batches trees with dynamic level scheduling: nodes are grouped by
height so each level evaluates as one matrix operation across the batch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor, concat, dropout_mask, matmul, rows, sigmoid, softmax, tanh
from .errors import ContractError, ShapeError
from .ids import BINARY_IDCS, ALL_IDCS, GlyphTree, Leaf, Op, UNK_TOKEN

GATES = ("i", "fl", "fr", "o", "c")
PAD_TOKEN = "<PAD>"  # zero vector, excluded from the vocabulary


def _uniform(rng: np.random.Generator, shape, bound: float) -> np.ndarray:
    return rng.uniform(-bound, bound, size=shape)


def _weight(rng, rows_, cols, name) -> Tensor:
    return Tensor(_uniform(rng, (rows_, cols), 1.0 / np.sqrt(cols)), name=name)


# ---------------------------------------------------------------------------
# vocabulary embeddings
# ---------------------------------------------------------------------------

class VocabEmbeddings:
    """Token-to-vector table over terminals, operators, and UNK."""

    def __init__(self, leaf_tokens, d_in: int, rng: np.random.Generator,
                 name: str = "embeddings"):
        self.d_in = d_in
        tokens = [UNK_TOKEN]
        tokens += sorted(set(leaf_tokens) - {UNK_TOKEN} - ALL_IDCS)
        tokens += sorted(BINARY_IDCS)
        self.tokens = tokens
        self.index = {tok: i for i, tok in enumerate(tokens)}
        self.table = Tensor(_uniform(rng, (len(tokens), d_in), 0.1), name=name)

    @classmethod
    def from_tokens(cls, tokens: list[str], d_in: int,
                    name: str = "embeddings") -> "VocabEmbeddings":
        """Rebuild with an exact saved token order (zero-filled table)."""
        self = cls.__new__(cls)
        self.d_in = d_in
        self.tokens = list(tokens)
        self.index = {tok: i for i, tok in enumerate(self.tokens)}
        self.table = Tensor(np.zeros((len(self.tokens), d_in)), name=name)
        return self

    def token_ids(self, tokens) -> np.ndarray:
        unk = self.index[UNK_TOKEN]
        return np.array([self.index.get(t, unk) for t in tokens], dtype=np.intp)

    def lookup(self, tokens) -> Tensor:
        """Embedding rows for a token sequence, shape (len(tokens), d_in)."""
        return rows(self.table, self.token_ids(tokens))

    def params(self) -> dict[str, Tensor]:
        return {self.table.name: self.table}


# ---------------------------------------------------------------------------
# tree cell
# ---------------------------------------------------------------------------

@dataclass
class TreeLstmParams:
    """Per-gate weights of the binary tree cell.

    Each gate g has recurrent matrices Ul/Ur (hidden x hidden) applied to
    the child hidden states and input matrices V/Vl/Vr (hidden x d_in)
    applied to the node's own input vector and the children's input
    vectors, plus an optional bias.
    """

    hidden: int
    d_in: int
    use_bias: bool = True
    operator_inputs: bool = True  # ablation switch: drop V terms at inner nodes
    weights: dict[str, Tensor] = field(default_factory=dict)

    @classmethod
    def init(cls, hidden: int, d_in: int, rng: np.random.Generator,
             use_bias: bool = True, operator_inputs: bool = True,
             prefix: str = "tree") -> "TreeLstmParams":
        p = cls(hidden, d_in, use_bias, operator_inputs)
        for g in GATES:
            p.weights[f"Ul_{g}"] = _weight(rng, hidden, hidden, f"{prefix}.Ul_{g}")
            p.weights[f"Ur_{g}"] = _weight(rng, hidden, hidden, f"{prefix}.Ur_{g}")
            p.weights[f"V_{g}"] = _weight(rng, hidden, d_in, f"{prefix}.V_{g}")
            p.weights[f"Vl_{g}"] = _weight(rng, hidden, d_in, f"{prefix}.Vl_{g}")
            p.weights[f"Vr_{g}"] = _weight(rng, hidden, d_in, f"{prefix}.Vr_{g}")
            if use_bias:
                p.weights[f"b_{g}"] = Tensor(np.zeros(hidden), name=f"{prefix}.b_{g}")
        return p

    def params(self) -> dict[str, Tensor]:
        return {t.name: t for t in self.weights.values()}


def _gate_preact(p: TreeLstmParams, g: str, x_n, x_l, x_r, h_l, h_r,
                 inputs_on: bool) -> Tensor:
    w = p.weights
    pre = matmul(h_l, w[f"Ul_{g}"].T) + matmul(h_r, w[f"Ur_{g}"].T)
    if inputs_on:
        pre = pre + matmul(x_n, w[f"V_{g}"].T)
        pre = pre + matmul(x_l, w[f"Vl_{g}"].T) + matmul(x_r, w[f"Vr_{g}"].T)
    if p.use_bias:
        pre = pre + w[f"b_{g}"]
    return pre


def treelstm_node(x_n: Tensor, x_l: Tensor, x_r: Tensor, h_l: Tensor,
                  h_r: Tensor, c_l: Tensor, c_r: Tensor, p: TreeLstmParams,
                  inputs_on: bool = True,
                  return_gates: bool = False):
    """One cell evaluation; all arguments are (n, dim) row matrices.

    i, fl, fr, o gate through sigmoids of five-term affine forms; the
    candidate goes through tanh; the new cell is i*cand + fl*c_l + fr*c_r
    and the hidden state is o*tanh(cell).
    """
    if x_n.data.shape[-1] != p.d_in or h_l.data.shape[-1] != p.hidden:
        raise ShapeError(f"treelstm_node: x {x_n.data.shape} h {h_l.data.shape} "
                         f"vs d_in={p.d_in} hidden={p.hidden}")
    i = sigmoid(_gate_preact(p, "i", x_n, x_l, x_r, h_l, h_r, inputs_on))
    f_l = sigmoid(_gate_preact(p, "fl", x_n, x_l, x_r, h_l, h_r, inputs_on))
    f_r = sigmoid(_gate_preact(p, "fr", x_n, x_l, x_r, h_l, h_r, inputs_on))
    o = sigmoid(_gate_preact(p, "o", x_n, x_l, x_r, h_l, h_r, inputs_on))
    cand = tanh(_gate_preact(p, "c", x_n, x_l, x_r, h_l, h_r, inputs_on))
    c_n = i * cand + f_l * c_l + f_r * c_r
    h_n = o * tanh(c_n)
    if return_gates:
        return c_n, h_n, {"i": i, "fl": f_l, "fr": f_r, "o": o}
    return c_n, h_n


@dataclass
class NodeState:
    """Evaluation record of one tree node, children before parents."""

    token: str
    is_leaf: bool
    c: Tensor
    h: Tensor


def treelstm_forward(tree: GlyphTree, embeds: VocabEmbeddings,
                     p: TreeLstmParams) -> tuple[Tensor, list[NodeState]]:
    """Sequential bottom-up evaluation of one tree.

    Leaves read their own embedding with zero child states and zero child
    inputs; inner nodes read the operator embedding, with each child input
    vector being that child's own input embedding.
    """
    zeros_h = Tensor(np.zeros((1, p.hidden)))
    zeros_x = Tensor(np.zeros((1, p.d_in)))
    states: list[NodeState] = []

    def embed_of(node) -> Tensor:
        return embeds.lookup([node.token if isinstance(node, Leaf) else node.idc])

    def walk(node) -> tuple[Tensor, Tensor]:
        if isinstance(node, Leaf):
            x_n = embeds.lookup([node.token])
            c, h = treelstm_node(x_n, zeros_x, zeros_x, zeros_h, zeros_h,
                                 zeros_h, zeros_h, p, inputs_on=True)
            states.append(NodeState(node.token, True, c, h))
            return c, h
        c_l, h_l = walk(node.left)
        c_r, h_r = walk(node.right)
        x_n = embeds.lookup([node.idc])
        c, h = treelstm_node(x_n, embed_of(node.left), embed_of(node.right),
                             h_l, h_r, c_l, c_r, p,
                             inputs_on=p.operator_inputs)
        states.append(NodeState(node.idc, False, c, h))
        return c, h

    _, h_root = walk(tree)
    return h_root, states


# ---------------------------------------------------------------------------
# dynamic level batching
# ---------------------------------------------------------------------------

@dataclass
class NodeSlot:
    token: str          # own input token (leaf character or operator)
    left: int = -1      # global slot ids of children; -1 for leaves
    right: int = -1
    xl_token: str | None = None
    xr_token: str | None = None


@dataclass
class LevelSchedule:
    """Nodes grouped by height; children always sit in earlier levels."""

    levels: list[list[NodeSlot]]
    roots: list[int]  # per-tree global slot id of the root

    @property
    def total_slots(self) -> int:
        return sum(len(lv) for lv in self.levels)


def build_level_schedule(trees) -> LevelSchedule:
    """Group every node of every tree by height (leaves at level 0).

    Global slot ids number the nodes level by level, so a node's children
    always have smaller slot ids than the node itself.
    """
    trees = list(trees)
    if not trees:
        raise ContractError("empty batch")
    # first pass: bucket nodes per level; children referenced as (level, idx)
    buckets: list[list[tuple]] = []  # (token, lchild, rchild, xl, xr)

    def place(node) -> tuple[int, int]:
        if isinstance(node, Leaf):
            lvl, entry = 0, (node.token, None, None, None, None)
        else:
            lref = place(node.left)
            rref = place(node.right)
            lvl = 1 + max(lref[0], rref[0])
            entry = (node.idc, lref, rref,
                     _input_token(node.left), _input_token(node.right))
        while len(buckets) <= lvl:
            buckets.append([])
        buckets[lvl].append(entry)
        return lvl, len(buckets[lvl]) - 1

    root_refs = [place(t) for t in trees]

    offsets = np.cumsum([0] + [len(b) for b in buckets[:-1]]).tolist()

    def slot_id(ref: tuple[int, int]) -> int:
        return offsets[ref[0]] + ref[1]

    levels = []
    for entries in buckets:
        level_slots = []
        for token, lref, rref, xl, xr in entries:
            if lref is None:
                level_slots.append(NodeSlot(token))
            else:
                level_slots.append(NodeSlot(token, slot_id(lref), slot_id(rref),
                                            xl, xr))
        levels.append(level_slots)
    return LevelSchedule(levels, [slot_id(r) for r in root_refs])


def _input_token(node) -> str:
    return node.token if isinstance(node, Leaf) else node.idc


def treelstm_batch_forward(trees, embeds: VocabEmbeddings, p: TreeLstmParams,
                           schedule: LevelSchedule | None = None,
                           input_dropout: float = 0.0,
                           rng: np.random.Generator | None = None,
                           training: bool = False) -> Tensor:
    """Level-batched evaluation; returns root hidden states, one row per tree.

    Per-tree results match the sequential evaluation (same arithmetic,
    grouped into one matrix operation per level).
    """
    schedule = schedule or build_level_schedule(trees)
    h_pool: Tensor | None = None
    c_pool: Tensor | None = None

    def maybe_drop(x: Tensor) -> Tensor:
        if training and input_dropout > 0.0:
            if rng is None:
                raise ContractError("training dropout needs an rng")
            return x * dropout_mask(x.data.shape, input_dropout, rng, training)
        return x

    for lvl, slots in enumerate(schedule.levels):
        n = len(slots)
        x_n = maybe_drop(embeds.lookup([s.token for s in slots]))
        if lvl == 0:
            zeros_h = Tensor(np.zeros((n, p.hidden)))
            zeros_x = Tensor(np.zeros((n, p.d_in)))
            c, h = treelstm_node(x_n, zeros_x, zeros_x, zeros_h, zeros_h,
                                 zeros_h, zeros_h, p, inputs_on=True)
        else:
            left = np.array([s.left for s in slots], dtype=np.intp)
            right = np.array([s.right for s in slots], dtype=np.intp)
            x_l = maybe_drop(embeds.lookup([s.xl_token for s in slots]))
            x_r = maybe_drop(embeds.lookup([s.xr_token for s in slots]))
            c, h = treelstm_node(x_n, x_l, x_r,
                                 rows(h_pool, left), rows(h_pool, right),
                                 rows(c_pool, left), rows(c_pool, right),
                                 p, inputs_on=p.operator_inputs)
        h_pool = h if h_pool is None else concat([h_pool, h], axis=0)
        c_pool = c if c_pool is None else concat([c_pool, c], axis=0)
    return rows(h_pool, np.array(schedule.roots, dtype=np.intp))


# ---------------------------------------------------------------------------
# sequence baselines
# ---------------------------------------------------------------------------

@dataclass
class LstmParams:
    """Stacked unidirectional recurrent cell weights (1 or 2 layers)."""

    hidden: int
    d_in: int
    layers: int = 1
    weights: dict[str, Tensor] = field(default_factory=dict)

    @classmethod
    def init(cls, hidden: int, d_in: int, rng: np.random.Generator,
             layers: int = 1, prefix: str = "lstm") -> "LstmParams":
        p = cls(hidden, d_in, layers)
        for layer in range(layers):
            ind = d_in if layer == 0 else hidden
            for g in ("i", "f", "o", "c"):
                p.weights[f"L{layer}.Wx_{g}"] = _weight(
                    rng, hidden, ind, f"{prefix}.L{layer}.Wx_{g}")
                p.weights[f"L{layer}.Wh_{g}"] = _weight(
                    rng, hidden, hidden, f"{prefix}.L{layer}.Wh_{g}")
                p.weights[f"L{layer}.b_{g}"] = Tensor(
                    np.zeros(hidden), name=f"{prefix}.L{layer}.b_{g}")
        return p

    def params(self) -> dict[str, Tensor]:
        return {t.name: t for t in self.weights.values()}


def lstm_cell(x: Tensor, h: Tensor, c: Tensor, p: LstmParams,
              layer: int = 0) -> tuple[Tensor, Tensor]:
    w = p.weights

    def pre(g):
        return (matmul(x, w[f"L{layer}.Wx_{g}"].T)
                + matmul(h, w[f"L{layer}.Wh_{g}"].T) + w[f"L{layer}.b_{g}"])

    i = sigmoid(pre("i"))
    f = sigmoid(pre("f"))
    o = sigmoid(pre("o"))
    cand = tanh(pre("c"))
    c_new = f * c + i * cand
    h_new = o * tanh(c_new)
    return h_new, c_new


def lstm_batch_forward(seqs: list[list[str]], embeds: VocabEmbeddings,
                       p: LstmParams, input_dropout: float = 0.0,
                       rng: np.random.Generator | None = None,
                       training: bool = False,
                       collect_states: bool = False):
    """Batched recurrence over end-padded sequences; returns final h (n, H).

    Padded steps carry states through unchanged, so the final state equals
    each sequence's state at its true last token.
    """
    if not seqs or any(len(s) == 0 for s in seqs):
        raise ContractError("sequences must be non-empty")
    n = len(seqs)
    max_len = max(len(s) for s in seqs)
    ids_ = np.zeros((n, max_len), dtype=np.intp)
    mask = np.zeros((n, max_len, 1))
    for k, seq in enumerate(seqs):
        ids_[k, :len(seq)] = embeds.token_ids(seq)
        mask[k, :len(seq)] = 1.0

    x_all = rows(embeds.table, ids_.reshape(-1))
    if training and input_dropout > 0.0:
        if rng is None:
            raise ContractError("training dropout needs an rng")
        x_all = x_all * dropout_mask(x_all.data.shape, input_dropout, rng, training)

    states = []
    inputs = [ad.narrow(ad.reshape(x_all, (n, max_len, embeds.d_in)), 1, t, 1)
              for t in range(max_len)]
    inputs = [ad.reshape(x, (n, embeds.d_in)) for x in inputs]
    layer_in = inputs
    for layer in range(p.layers):
        h = Tensor(np.zeros((n, p.hidden)))
        c = Tensor(np.zeros((n, p.hidden)))
        outs = []
        for t in range(max_len):
            m = Tensor(mask[:, t])
            keep = Tensor(1.0 - mask[:, t])
            h_new, c_new = lstm_cell(layer_in[t], h, c, p, layer)
            h = h_new * m + h * keep
            c = c_new * m + c * keep
            outs.append(h)
            if collect_states and layer == p.layers - 1:
                states.append(h)
        layer_in = outs
    if collect_states:
        return h, states
    return h


def lstm_forward(seq: list[str], embeds: VocabEmbeddings, p: LstmParams) -> Tensor:
    """Final hidden state of one sequence, shape (1, hidden)."""
    return lstm_batch_forward([list(seq)], embeds, p)


@dataclass
class BiLstmParams:
    forward: LstmParams
    backward: LstmParams

    @classmethod
    def init(cls, hidden: int, d_in: int, rng: np.random.Generator,
             layers: int = 1, prefix: str = "bilstm") -> "BiLstmParams":
        return cls(LstmParams.init(hidden, d_in, rng, layers, f"{prefix}.fwd"),
                   LstmParams.init(hidden, d_in, rng, layers, f"{prefix}.bwd"))

    @property
    def hidden(self):
        return self.forward.hidden

    def params(self) -> dict[str, Tensor]:
        return {**self.forward.params(), **self.backward.params()}


def bilstm_batch_forward(seqs: list[list[str]], embeds: VocabEmbeddings,
                         p: BiLstmParams, input_dropout: float = 0.0,
                         rng: np.random.Generator | None = None,
                         training: bool = False) -> Tensor:
    """Concatenation [forward final state, backward final state], (n, 2H)."""
    h_f = lstm_batch_forward(seqs, embeds, p.forward, input_dropout, rng, training)
    rev = [list(reversed(s)) for s in seqs]
    h_b = lstm_batch_forward(rev, embeds, p.backward, input_dropout, rng, training)
    return concat([h_f, h_b], axis=-1)


def bilstm_forward(seq: list[str], embeds: VocabEmbeddings,
                   p: BiLstmParams) -> Tensor:
    return bilstm_batch_forward([list(seq)], embeds, p)


# ---------------------------------------------------------------------------
# convolutional encoder
# ---------------------------------------------------------------------------

@dataclass
class CnnParams:
    """Parallel 1-D convolution banks of widths 1..7 with max-pooling.

    Each bank applies ``n_filters`` kernels over windows of token vectors,
    a tanh nonlinearity, then a global max-pool over positions; the pooled
    bank outputs are concatenated and projected to the embedding size.
    """

    d_in: int
    out_dim: int
    n_filters: int = 200
    widths: tuple[int, ...] = (1, 2, 3, 4, 5, 6, 7)
    weights: dict[str, Tensor] = field(default_factory=dict)

    @classmethod
    def init(cls, d_in: int, out_dim: int, rng: np.random.Generator,
             n_filters: int = 200, prefix: str = "cnn") -> "CnnParams":
        p = cls(d_in, out_dim, n_filters)
        for w in p.widths:
            p.weights[f"K{w}"] = _weight(rng, w * d_in, n_filters, f"{prefix}.K{w}")
            p.weights[f"kb{w}"] = Tensor(np.zeros(n_filters), name=f"{prefix}.kb{w}")
        total = n_filters * len(p.widths)
        p.weights["W_fc"] = _weight(rng, out_dim, total, f"{prefix}.W_fc")
        p.weights["b_fc"] = Tensor(np.zeros(out_dim), name=f"{prefix}.b_fc")
        return p

    def params(self) -> dict[str, Tensor]:
        return {t.name: t for t in self.weights.values()}


def _pad_batch(seqs: list[list[str]], embeds: VocabEmbeddings,
               min_len: int) -> tuple[Tensor, int]:
    """Stack token embeddings, zero-padding each sequence to a shared length."""
    n = len(seqs)
    max_len = max(min_len, max(len(s) for s in seqs))
    ids_ = np.zeros((n, max_len), dtype=np.intp)
    mask = np.zeros((n, max_len, 1))
    for k, seq in enumerate(seqs):
        ids_[k, :len(seq)] = embeds.token_ids(seq)
        mask[k, :len(seq)] = 1.0
    x = rows(embeds.table, ids_.reshape(-1))
    x = ad.reshape(x, (n, max_len, embeds.d_in))
    return x * Tensor(mask), max_len  # pad positions become zero vectors


def cnn_pooled(seqs: list[list[str]], embeds: VocabEmbeddings,
               p: CnnParams, input_dropout: float = 0.0,
               rng: np.random.Generator | None = None,
               training: bool = False) -> Tensor:
    """Concatenated per-bank max-pooled responses, (n, n_filters * n_widths)."""
    if not seqs or any(len(s) == 0 for s in seqs):
        raise ContractError("sequences must be non-empty")
    x, max_len = _pad_batch(seqs, embeds, min_len=max(p.widths))
    if training and input_dropout > 0.0:
        if rng is None:
            raise ContractError("training dropout needs an rng")
        x = x * dropout_mask(x.data.shape, input_dropout, rng, training)
    n = len(seqs)
    pooled = []
    for w in p.widths:
        kernel = p.weights[f"K{w}"]
        positions = max_len - w + 1
        resp = None
        for j in range(w):
            xj = ad.narrow(x, 1, j, positions)
            xj = ad.reshape(xj, (n * positions, embeds.d_in))
            kj = ad.narrow(kernel, 0, j * p.d_in, p.d_in)
            term = matmul(xj, kj)
            resp = term if resp is None else resp + term
        resp = resp + p.weights[f"kb{w}"]
        resp = tanh(ad.reshape(resp, (n, positions, p.n_filters)))
        pooled.append(resp.max(axis=1))
    return concat(pooled, axis=-1)


def cnn_batch_forward(seqs, embeds, p: CnnParams, input_dropout: float = 0.0,
                      rng=None, training: bool = False) -> Tensor:
    pooled = cnn_pooled(seqs, embeds, p, input_dropout, rng, training)
    return matmul(pooled, p.weights["W_fc"].T) + p.weights["b_fc"]


def cnn_forward(seq: list[str], embeds: VocabEmbeddings, p: CnnParams) -> Tensor:
    return cnn_batch_forward([list(seq)], embeds, p)
