"""Interpretability tooling over trained models.

Three read-only analyses: forget-gate asymmetry at the root of
horizontally-arranged logographs (does the model prefer the right child,
the usual phonetic side), per-node prediction probing (feeding intermediate
hidden states to the task head), and cosine nearest neighbors in embedding
space.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass

import numpy as np

from . import encoders as enc
from .autodiff import Tensor
from .errors import ContractError, DataError
from .ids import IDC_ACROSS, GlyphTree, Leaf, Op, RuleTable, decompose
from .pron import UNITS, PronModel, encode_inputs, predict_pron

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# forget-gate bias
# ---------------------------------------------------------------------------

@dataclass
class GateBiasReport:
    total: int           # logographs with a left-right arranged root
    prefer_right: int    # of those, where the right forget gate dominates

    @property
    def percentage(self) -> float | None:
        if self.total == 0:
            return None
        return 100.0 * self.prefer_right / self.total


def root_forget_gates(model: PronModel, tree: GlyphTree
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Left and right forget-gate activations at the root of one tree."""
    if model.config.encoder != "treelstm":
        raise ContractError("gate analysis needs a tree-structured model")
    if isinstance(tree, Leaf):
        raise ContractError("gate analysis needs an inner root node")
    p = model.encoder
    _, left_states = enc.treelstm_forward(tree.left, model.embeds, p)
    _, right_states = enc.treelstm_forward(tree.right, model.embeds, p)
    c_l, h_l = left_states[-1].c, left_states[-1].h
    c_r, h_r = right_states[-1].c, right_states[-1].h

    def input_embed(node):
        return model.embeds.lookup(
            [node.token if isinstance(node, Leaf) else node.idc])

    x_n = model.embeds.lookup([tree.idc])
    _, _, gates = enc.treelstm_node(x_n, input_embed(tree.left),
                                    input_embed(tree.right), h_l, h_r, c_l,
                                    c_r, p, inputs_on=p.operator_inputs,
                                    return_gates=True)
    return gates["fl"].data[0], gates["fr"].data[0]


def gate_bias(model: PronModel, trees) -> GateBiasReport:
    """Count left-right-rooted trees whose right forget gate has the larger
    L2 norm. An exact tie does not count as preferring the right child."""
    total = 0
    prefer_right = 0
    for tree in trees:
        if not (isinstance(tree, Op) and tree.idc == IDC_ACROSS):
            continue
        total += 1
        f_l, f_r = root_forget_gates(model, tree)
        if np.linalg.norm(f_r) > np.linalg.norm(f_l):
            prefer_right += 1
    return GateBiasReport(total, prefer_right)


# ---------------------------------------------------------------------------
# per-node probing
# ---------------------------------------------------------------------------

@dataclass
class ProbeRow:
    node_id: int
    token: str
    magnitudes: np.ndarray  # |h| per hidden unit, for heat-map export
    onset: str
    nucleus: str
    coda: str


@dataclass
class ProbeTrace:
    char: str
    rows: list[ProbeRow]

    def final_decoding(self) -> dict[str, str]:
        last = self.rows[-1]
        return {"onset": last.onset, "nucleus": last.nucleus, "coda": last.coda}


def _decode_h(model: PronModel, h: Tensor) -> dict[str, str]:
    probs = predict_pron(h, model.head)
    return {u: model.inventories.classes(u)[int(np.argmax(probs[u].data[0]))]
            for u in UNITS}


def probe(model: PronModel, ch: str, rules: RuleTable) -> ProbeTrace:
    """Per-node (or per-timestep) hidden states fed to the task head.

    The trace follows evaluation order, so the last row is the model's own
    prediction for the logograph.
    """
    tree = decompose(ch, rules)
    if model.config.encoder == "treelstm":
        _, states = enc.treelstm_forward(tree, model.embeds, model.encoder)
        pairs = [(s.token, s.h) for s in states]
    elif model.config.encoder == "lstm":
        seq = encode_inputs(model, [ch], rules)[0]
        _, hs = enc.lstm_batch_forward([seq], model.embeds, model.encoder,
                                       collect_states=True)
        pairs = list(zip(seq, hs))
    else:
        raise ContractError("probing supports the tree and unidirectional "
                            "sequence encoders")
    rows = []
    for node_id, (token, h) in enumerate(pairs):
        decoded = _decode_h(model, h)
        rows.append(ProbeRow(node_id, token, np.abs(h.data[0]), **decoded))
    return ProbeTrace(ch, rows)


def probe_to_csv(trace: ProbeTrace, path) -> None:
    width = len(trace.rows[0].magnitudes)
    header = ["node_id", "token", "onset", "nucleus", "coda"]
    header += [f"h{k}" for k in range(width)]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in trace.rows:
            writer.writerow([row.node_id, row.token, row.onset, row.nucleus,
                             row.coda] + [f"{v:.6g}" for v in row.magnitudes])


# ---------------------------------------------------------------------------
# nearest neighbors
# ---------------------------------------------------------------------------

def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise DataError("cosine similarity undefined for zero-norm vectors")
    return float(np.dot(a, b) / (na * nb))


def nearest_neighbors(table: dict[str, np.ndarray], query: str,
                      k: int) -> list[tuple[str, float]]:
    """Top-k characters by cosine similarity to the query's embedding.

    The query itself is excluded; zero-norm entries are skipped with a
    warning; ties break toward the smaller codepoint.
    """
    if k < 1:
        raise ContractError("k must be at least 1")
    if query not in table:
        raise DataError(f"query {query!r} has no embedding")
    q = table[query]
    if np.linalg.norm(q) == 0.0:
        raise DataError(f"query {query!r} has a zero-norm embedding")
    scored = []
    for ch, vec in table.items():
        if ch == query:
            continue
        if np.linalg.norm(vec) == 0.0:
            log.warning("excluding zero-norm embedding for %r", ch)
            continue
        scored.append((ch, cosine_similarity(q, vec)))
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored[:k]


def lm_embedding_table(model, restrict_to=None) -> dict[str, np.ndarray]:
    """Character embeddings of a language model, composed where possible."""
    from .lm import EOS_TOKEN, UNK_TOKEN, build_cache
    chars = [ch for ch in model.vocab if ch not in (EOS_TOKEN, UNK_TOKEN)]
    if restrict_to is not None:
        chars = [ch for ch in chars if ch in restrict_to]
    table = {}
    if model.hierarchical:
        cache = build_cache(model)
        for ch in chars:
            if ch in cache.vectors:
                table[ch] = cache.vectors[ch]
            else:
                table[ch] = model.aux.data[model.index[ch]].copy()
    else:
        for ch in chars:
            table[ch] = model.lookup.data[model.index[ch]].copy()
    return table
