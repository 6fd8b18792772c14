"""Pronunciation prediction: chained sub-syllabic head, training loop,
error-rate metrics, grid search, and the experiment matrix.

The task head predicts coda, nucleus, and onset in a chain: each unit's
softmax consumes the logograph embedding concatenated with the probability
vectors of the units already predicted. Predicted soft distributions feed
the chain during both training and evaluation.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace
from itertools import product

import numpy as np

from . import autodiff as ad
from . import encoders as enc
from .autodiff import Adam, Tape, Tensor, concat, dropout_mask, matmul, softmax
from .checkpoint import load_checkpoint, save_checkpoint
from .config import RunConfig, config_to_dict, validate_config
from .errors import ContractError, DataError, ShapeError
from .ids import LinearOrder, RuleTable, decompose, linearize, strip_operators
from .phono import NULL, DatasetSplit, PronEntry

log = logging.getLogger(__name__)

UNITS = ("onset", "nucleus", "coda")
ORDERS = {"cd_nu_on": ("coda", "nucleus", "onset"),
          "on_nu_cd": ("onset", "nucleus", "coda")}


@dataclass
class Inventories:
    """Class inventories per sub-syllabic unit, built from training data."""

    onset: list[str]
    nucleus: list[str]
    coda: list[str]

    @classmethod
    def from_entries(cls, entries) -> "Inventories":
        def inv(get):
            return sorted({get(e) for e in entries} | {NULL})
        return cls(inv(lambda e: e.onset), inv(lambda e: e.nucleus),
                   inv(lambda e: e.coda))

    def classes(self, unit: str) -> list[str]:
        return getattr(self, unit)

    def index(self, unit: str, value: str) -> int:
        classes = self.classes(unit)
        try:
            return classes.index(value)
        except ValueError:
            raise DataError(f"{unit} class {value!r} not in inventory") from None


@dataclass
class PronHead:
    """Chained fully-connected layers, one per sub-syllabic unit."""

    order: tuple[str, str, str]
    use_bias: bool = True
    weights: dict[str, Tensor] = field(default_factory=dict)

    @classmethod
    def init(cls, embed_dim: int, inventories: Inventories,
             rng: np.random.Generator, order_name: str = "cd_nu_on",
             use_bias: bool = True, prefix: str = "head") -> "PronHead":
        order = ORDERS[order_name]
        head = cls(order, use_bias)
        in_dim = embed_dim
        for unit in order:
            n_classes = len(inventories.classes(unit))
            head.weights[f"W_{unit}"] = enc._weight(rng, n_classes, in_dim,
                                                    f"{prefix}.W_{unit}")
            if use_bias:
                head.weights[f"b_{unit}"] = Tensor(np.zeros(n_classes),
                                                   name=f"{prefix}.b_{unit}")
            in_dim += n_classes
        return head

    def params(self) -> dict[str, Tensor]:
        return {t.name: t for t in self.weights.values()}


def predict_pron(h: Tensor, head: PronHead) -> dict[str, Tensor]:
    """Distributions for each unit, chained in the head's order.

    ``h`` has one row per logograph; each returned distribution row sums
    to 1 over that unit's inventory.
    """
    feats = h
    probs: dict[str, Tensor] = {}
    for unit in head.order:
        logits = matmul(feats, head.weights[f"W_{unit}"].T)
        if head.use_bias:
            logits = logits + head.weights[f"b_{unit}"]
        p = softmax(logits)
        probs[unit] = p
        feats = concat([feats, p], axis=-1)
    return probs


def pron_loss(probs: dict[str, Tensor], targets: list[PronEntry],
              inventories: Inventories) -> Tensor:
    """Mean over the batch of the summed per-unit cross-entropies."""
    n = len(targets)
    total = None
    for unit in UNITS:
        p = probs[unit]
        if p.data.shape[0] != n:
            raise ShapeError(f"{unit}: {p.data.shape[0]} rows for {n} targets")
        onehot = np.zeros_like(p.data)
        for k, e in enumerate(targets):
            onehot[k, inventories.index(unit, getattr(e, unit))] = 1.0
        picked = (p * Tensor(onehot)).sum(axis=-1)  # target probability per row
        ce = -ad.log(picked).sum()
        total = ce if total is None else total + ce
    return total * (1.0 / n)


# ---------------------------------------------------------------------------
# model bundle
# ---------------------------------------------------------------------------

ENCODERS = ("treelstm", "lstm", "bilstm", "cnn")


@dataclass
class PronModel:
    config: RunConfig
    embeds: enc.VocabEmbeddings
    encoder: object
    head: PronHead
    inventories: Inventories

    def params(self) -> dict[str, Tensor]:
        return {**self.embeds.params(), **self.encoder.params(),
                **self.head.params()}

    @property
    def embed_dim(self) -> int:
        return 2 * self.config.hidden if self.config.encoder == "bilstm" \
            else self.config.hidden

    def model_name(self) -> str:
        if self.config.encoder in ("lstm", "bilstm"):
            return f"{self.config.encoder}-{self.config.layers}"
        return self.config.encoder


def build_model(config: RunConfig, inventories: Inventories,
                leaf_tokens) -> PronModel:
    validate_config(config)
    rng = np.random.default_rng(config.seed)
    embeds = enc.VocabEmbeddings(leaf_tokens, config.d_in, rng)
    kind = config.encoder
    if kind == "treelstm":
        encoder = enc.TreeLstmParams.init(config.hidden, config.d_in, rng,
                                          use_bias=config.tree_bias,
                                          operator_inputs=config.operators)
    elif kind == "lstm":
        encoder = enc.LstmParams.init(config.hidden, config.d_in, rng,
                                      layers=config.layers)
    elif kind == "bilstm":
        encoder = enc.BiLstmParams.init(config.hidden, config.d_in, rng,
                                        layers=config.layers)
    elif kind == "cnn":
        encoder = enc.CnnParams.init(config.d_in, config.hidden, rng,
                                     n_filters=config.cnn_filters)
    else:
        raise ContractError(f"unknown encoder {kind!r}")
    embed_dim = 2 * config.hidden if kind == "bilstm" else config.hidden
    head = PronHead.init(embed_dim, inventories, rng,
                         order_name=config.output_order,
                         use_bias=config.head_bias)
    return PronModel(config, embeds, encoder, head, inventories)


def encode_inputs(model: PronModel, chars, rules: RuleTable):
    """Characters to encoder inputs: trees for the recursive encoder,
    linearized (optionally operator-stripped) token sequences otherwise."""
    cfg = model.config
    trees = [decompose(ch, rules) for ch in chars]
    if cfg.encoder == "treelstm":
        return trees
    order = LinearOrder(cfg.linearization)
    seqs = [linearize(t, order) for t in trees]
    if not cfg.operators:
        seqs = [strip_operators(s) for s in seqs]
    return seqs


def forward_batch(model: PronModel, inputs, rng=None,
                  training: bool = False) -> Tensor:
    """Embeddings for a batch of encoder inputs, one row each."""
    cfg = model.config
    drop = cfg.dropout if training else 0.0
    if cfg.encoder == "treelstm":
        h = enc.treelstm_batch_forward(inputs, model.embeds, model.encoder,
                                       input_dropout=drop, rng=rng,
                                       training=training)
    elif cfg.encoder == "lstm":
        h = enc.lstm_batch_forward(inputs, model.embeds, model.encoder,
                                   input_dropout=drop, rng=rng, training=training)
    elif cfg.encoder == "bilstm":
        h = enc.bilstm_batch_forward(inputs, model.embeds, model.encoder,
                                     input_dropout=drop, rng=rng,
                                     training=training)
    else:
        h = enc.cnn_batch_forward(inputs, model.embeds, model.encoder,
                                  input_dropout=drop, rng=rng, training=training)
    if training and cfg.dropout > 0.0:
        h = h * dropout_mask(h.data.shape, cfg.dropout, rng, training)
    return h


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

@dataclass
class EvalReport:
    n: int
    string_errors: int
    token_errors: int
    unit_errors: dict[str, int]

    @property
    def ser(self) -> float:
        return 100.0 * self.string_errors / self.n

    @property
    def ter(self) -> float:
        return 100.0 * self.token_errors / (3 * self.n)

    def unit_rate(self, unit: str) -> float:
        return 100.0 * self.unit_errors[unit] / self.n

    def row(self) -> dict:
        return {"SER": round(self.ser, 2), "TER": round(self.ter, 2),
                "onset": round(self.unit_rate("onset"), 2),
                "nucleus": round(self.unit_rate("nucleus"), 2),
                "coda": round(self.unit_rate("coda"), 2)}


def decode_batch(model: PronModel, inputs) -> list[dict[str, str]]:
    h = forward_batch(model, inputs)
    probs = predict_pron(h, model.head)
    out = []
    for k in range(h.data.shape[0]):
        out.append({unit: model.inventories.classes(unit)[int(np.argmax(probs[unit].data[k]))]
                    for unit in UNITS})
    return out


def evaluate(model: PronModel, entries: list[PronEntry], rules: RuleTable,
             batch_size: int = 256) -> EvalReport:
    """Argmax decoding of each unit; token and string error rates."""
    if not entries:
        raise DataError("cannot evaluate an empty partition")
    string_errors = 0
    unit_errors = dict.fromkeys(UNITS, 0)
    for start in range(0, len(entries), batch_size):
        chunk = entries[start:start + batch_size]
        inputs = encode_inputs(model, [e.ch for e in chunk], rules)
        decoded = decode_batch(model, inputs)
        for e, pred in zip(chunk, decoded):
            wrong = [u for u in UNITS if pred[u] != getattr(e, u)]
            for u in wrong:
                unit_errors[u] += 1
            string_errors += bool(wrong)
    token_errors = sum(unit_errors.values())
    return EvalReport(len(entries), string_errors, token_errors, unit_errors)


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------

@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    val_ter: float


def train(config: RunConfig, split: DatasetSplit, rules: RuleTable
          ) -> tuple[PronModel, list[EpochStats]]:
    """Mini-batch Adam over shuffled epochs, keeping the best-validation
    parameters. Deterministic for a fixed (config, split, rules)."""
    if not split.train or not split.validation:
        raise DataError("train and validation partitions must be non-empty")
    inventories = Inventories.from_entries(split.train)
    leaf_tokens = _leaf_vocab(split, rules)
    model = build_model(config, inventories, leaf_tokens)
    rng = np.random.default_rng(config.seed)
    optimizer = Adam(lr=config.learning_rate)
    params = model.params()

    train_inputs = encode_inputs(model, [e.ch for e in split.train], rules)
    history: list[EpochStats] = []
    best = None  # (ter, epoch, param snapshot)
    n = len(split.train)
    for epoch in range(config.epochs):
        perm = rng.permutation(n)
        total_loss = 0.0
        for start in range(0, n, config.batch_size):
            idx = perm[start:start + config.batch_size]
            batch_inputs = [train_inputs[i] for i in idx]
            batch_targets = [split.train[i] for i in idx]
            tape = Tape()
            with tape:
                h = forward_batch(model, batch_inputs, rng=rng, training=True)
                probs = predict_pron(h, model.head)
                loss = pron_loss(probs, batch_targets, inventories)
            ad.zero_grads(params.values())
            tape.backward(loss)
            ad.clip_global_norm(params.values(), config.clip_norm)
            optimizer.step(params)
            total_loss += float(loss.data) * len(idx)
        val = evaluate(model, split.validation, rules)
        stats = EpochStats(epoch, total_loss / n, val.ter)
        history.append(stats)
        if best is None or stats.val_ter < best[0]:
            best = (stats.val_ter, epoch,
                    {k: t.data.copy() for k, t in params.items()})
        log.debug("epoch %d loss %.4f val TER %.2f", epoch, stats.train_loss,
                  stats.val_ter)
    for k, t in params.items():
        t.data[:] = best[2][k]
    return model, history


def _leaf_vocab(split: DatasetSplit, rules: RuleTable) -> list[str]:
    return sorted(rules.leaf_set)


# ---------------------------------------------------------------------------
# grid search and the experiment matrix
# ---------------------------------------------------------------------------

DEFAULT_LR_GRID = (3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4)
DEFAULT_DROPOUT_GRID = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)


def _grid_cell(args) -> float:
    config, split, rules = args
    _, history = train(config, split, rules)
    return min(h.val_ter for h in history)


def grid_search(base: RunConfig, split: DatasetSplit, rules: RuleTable,
                learning_rates=DEFAULT_LR_GRID, dropouts=DEFAULT_DROPOUT_GRID,
                n_jobs: int = 1) -> tuple[RunConfig, list[dict]]:
    """Train every (learning rate, dropout) cell; lowest validation TER wins,
    ties broken by lower learning rate then lower dropout.

    Cells are independent, so ``n_jobs`` > 1 runs them in worker processes;
    the selection is deterministic either way.
    """
    cells = list(product(learning_rates, dropouts))
    if not cells:
        raise DataError("empty grid")
    configs = [replace(base, learning_rate=lr, dropout=dr) for lr, dr in cells]
    if n_jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            ters = list(pool.map(_grid_cell,
                                 [(c, split, rules) for c in configs]))
    else:
        ters = [_grid_cell((c, split, rules)) for c in configs]
    table = []
    best = None
    for (lr, dr), config, dev_ter in zip(cells, configs, ters):
        table.append({"learning_rate": lr, "dropout": dr, "dev_TER": dev_ter})
        key = (dev_ter, lr, dr)
        if best is None or key < best[0]:
            best = (key, config)
    return best[1], table


def run_matrix(base: RunConfig, splits: dict[int, DatasetSplit],
               rules: RuleTable, encoders=(("treelstm", 1),),
               scenarios=(1,), orders=("cd_nu_on",),
               ablations=(False,)) -> list[dict]:
    """Train/evaluate each cell of the experiment grid; one report row per
    (encoder, scenario, output order, ablation) combination."""
    rows = []
    for (kind, layers), scenario, order, ablated in product(
            encoders, scenarios, orders, ablations):
        if scenario not in splits:
            raise DataError(f"no split provided for scenario {scenario}")
        config = replace(base, encoder=kind, layers=layers, scenario=scenario,
                         output_order=order, operators=not ablated)
        model, _ = train(config, splits[scenario], rules)
        report = evaluate(model, splits[scenario].test, rules)
        row = {"model": model.model_name(), "scenario": scenario,
               "order": order, "ablation": "no-operators" if ablated else "full",
               **report.row()}
        rows.append(row)
        log.info("matrix row: %s", row)
    return rows


SEQUENCE_ENCODERS = (("lstm", 1), ("lstm", 2), ("bilstm", 1), ("bilstm", 2),
                     ("cnn", 1))


def linearization_study(base: RunConfig, split: DatasetSplit, rules: RuleTable,
                        encoders=SEQUENCE_ENCODERS,
                        linearizations=("pre", "post", "in"),
                        learning_rates=DEFAULT_LR_GRID,
                        dropouts=DEFAULT_DROPOUT_GRID,
                        n_jobs: int = 1) -> list[dict]:
    """Best development TER per (sequence encoder, linearization) pair.

    Each combination gets its own hyperparameter search, so the comparison
    is between tuned models, not between a fixed hyperparameter point.
    """
    rows = []
    for (kind, layers), lin in product(encoders, linearizations):
        config = replace(base, encoder=kind, layers=layers, linearization=lin)
        _, table = grid_search(config, split, rules, learning_rates, dropouts,
                               n_jobs=n_jobs)
        name = f"{kind}-{layers}" if kind in ("lstm", "bilstm") else kind
        rows.append({"model": name, "linearization": lin,
                     "dev_TER": min(r["dev_TER"] for r in table)})
        log.info("linearization study: %s", rows[-1])
    return rows


MATRIX_HEADER = ["model", "scenario", "order", "ablation", "SER", "TER",
                 "onset", "nucleus", "coda"]


def write_matrix_csv(rows: list[dict], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=MATRIX_HEADER)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def save_model(path, model: PronModel) -> None:
    manifest = {
        "kind": "pronunciation",
        "config": config_to_dict(model.config),
        "inventories": {u: model.inventories.classes(u) for u in UNITS},
        "vocab": model.embeds.tokens,
    }
    save_checkpoint(path, {k: t.data for k, t in model.params().items()}, manifest)


def load_model(path) -> PronModel:
    tensors, manifest = load_checkpoint(path)
    if manifest.get("kind") != "pronunciation":
        raise ContractError(f"{path} is not a pronunciation checkpoint")
    config = RunConfig(**manifest["config"])
    inv = Inventories(**{u: list(manifest["inventories"][u]) for u in UNITS})
    model = build_model(config, inv, manifest["vocab"])
    # the vocabulary must keep the exact saved token order
    model.embeds = enc.VocabEmbeddings.from_tokens(manifest["vocab"], config.d_in)
    for name, t in model.params().items():
        if name not in tensors:
            raise ContractError(f"{path}: missing tensor {name}")
        if tensors[name].shape != t.data.shape:
            raise ShapeError(f"{path}: {name} shape {tensors[name].shape} "
                             f"vs expected {t.data.shape}")
        t.data[:] = tensors[name]
    return model
