"""Experiment configuration, the training loop, and strategy comparisons.

Configs are flat `key = value` text files (# comments allowed) so that an
experiment is a diff-able artifact. Every derived output carries the
sha256 digest of the resolved configuration.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import models, sampling, taxonomy
from .errors import ConfigError, DataError
from .evaluation import evaluate
from .features import (
    TEST,
    TRAIN,
    VAL,
    Vocabulary,
    load_features,
    load_vad_lexicon,
    load_word_embeddings,
    stratified_split,
)
from .models import (
    CLASSIFIER_KINDS,
    METRIC_3BRANCH,
    REGRESSION_KINDS,
    VA_REGRESSION,
    W2V_REGRESSION,
    LabeledBatch,
    ModelParams,
    StrategyConfig,
    TrainingData,
    init_model,
    load_checkpoint,
    save_checkpoint,
    strategy_loss,
)
from .numcore import AdamState, adam_step

_DEFAULTS = {
    "text_features": "",
    "music_features": "",
    "lexicon": "",
    "embeddings": "",
    "map_file": "",
    "manual_dataset": "",
    "out_dir": "out",
    "strategy": "metric_3branch",
    "embedding_dim": "64",
    "margin": "0.2",
    "hidden": "256,256",
    "seed": "7",
    "scheme": "w2v",
    "split_ratios": "0.70,0.15,0.15",
    "split_seed": "",
    "lr": "0.0001",
    "batch_size": "32",
    "max_epochs": "30",
    "patience": "10",
    "weight_clamp": "10.0",
    "distance_floor": "0.05",
}


@dataclass
class ExperimentConfig:
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        unknown = sorted(set(self.values) - set(_DEFAULTS))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        merged = dict(_DEFAULTS)
        merged.update({k: str(v) for k, v in self.values.items()})
        self.values = merged

    # typed accessors -------------------------------------------------
    def path(self, key, required=False):
        p = self.values[key].strip()
        if required and not p:
            raise ConfigError(f"config key {key!r} is required")
        if p and not os.path.exists(p):
            raise ConfigError(f"{key} = {p!r}: file not found")
        return p or None

    def _float(self, key):
        try:
            return float(self.values[key])
        except ValueError:
            raise ConfigError(f"{key} = {self.values[key]!r}: not a number") from None

    def _int(self, key):
        try:
            return int(self.values[key])
        except ValueError:
            raise ConfigError(f"{key} = {self.values[key]!r}: not an integer") from None

    @property
    def strategy(self):
        return self.values["strategy"]

    @property
    def scheme(self):
        s = self.values["scheme"].strip().upper()
        if s not in taxonomy.SCHEMES:
            raise ConfigError(f"scheme = {self.values['scheme']!r}: unknown scheme")
        return s

    @property
    def lr(self):
        lr = self._float("lr")
        if lr <= 0:
            raise ConfigError(f"lr must be > 0, got {lr}")
        return lr

    @property
    def batch_size(self):
        b = self._int("batch_size")
        if b <= 0:
            raise ConfigError(f"batch_size must be > 0, got {b}")
        return b

    @property
    def max_epochs(self):
        e = self._int("max_epochs")
        if e < 0:
            raise ConfigError(f"max_epochs must be >= 0, got {e}")
        return e

    @property
    def patience(self):
        p = self._int("patience")
        if p <= 0:
            raise ConfigError(f"patience must be > 0, got {p}")
        return p

    @property
    def seed(self):
        return self._int("seed")

    @property
    def split_seed(self):
        raw = self.values["split_seed"].strip()
        return int(raw) if raw else self.seed

    @property
    def split_ratios(self):
        try:
            parts = tuple(float(x) for x in self.values["split_ratios"].split(","))
        except ValueError:
            raise ConfigError(
                f"split_ratios = {self.values['split_ratios']!r}: bad format") from None
        if len(parts) != 3 or abs(sum(parts) - 1.0) > 1e-9 or any(p < 0 for p in parts):
            raise ConfigError(f"split_ratios must be 3 values summing to 1, got {parts}")
        return parts

    @property
    def out_dir(self):
        return self.values["out_dir"]

    def strategy_config(self):
        try:
            hidden = tuple(int(h) for h in self.values["hidden"].split(","))
        except ValueError:
            raise ConfigError(f"hidden = {self.values['hidden']!r}: bad format") from None
        try:
            return StrategyConfig(
                kind=self.strategy,
                embedding_dim=self._int("embedding_dim"),
                margin=self._float("margin"),
                hidden=hidden,
                seed=self.seed,
            )
        except DataError as err:
            raise ConfigError(str(err)) from None

    def miner_config(self, dim):
        try:
            return sampling.MinerConfig(
                dim=dim,
                weight_clamp=self._float("weight_clamp"),
                distance_floor=self._float("distance_floor"),
                seed=self.seed,
            )
        except DataError as err:
            raise ConfigError(str(err)) from None

    # serialization ---------------------------------------------------
    def canonical(self):
        return "\n".join(f"{k} = {self.values[k]}" for k in sorted(self.values)) + "\n"

    def digest(self):
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()[:16]

    def with_overrides(self, **overrides):
        merged = dict(self.values)
        merged.update({k: str(v) for k, v in overrides.items()})
        return ExperimentConfig(merged)

    @classmethod
    def from_file(cls, path):
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        values = {}
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, value = line.split("=", 1)
                values[key.strip()] = value.strip()
        return cls(values)

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("# moodbridge experiment configuration\n")
            fh.write(self.canonical())


# ----------------------------------------------------------------------
# experiment assembly

@dataclass
class Experiment:
    config: ExperimentConfig
    strategy: StrategyConfig
    text: object
    music: object
    text_vocab: Vocabulary
    music_vocab: Vocabulary
    lexicon: object
    embeddings: object
    tax_map: object
    text_split: object
    music_split: object

    def tables(self, split):
        return (self.text_split.select(self.text, split),
                self.music_split.select(self.music, split))


def build_tax_map(config, text_vocab, music_vocab, lexicon, embeddings,
                  scheme=None):
    scheme = scheme.upper() if scheme else config.scheme
    if scheme not in taxonomy.SCHEMES:
        raise ConfigError(f"unknown scheme {scheme!r}")
    if scheme == taxonomy.VA:
        if lexicon is None:
            raise ConfigError("scheme va needs a lexicon path")
        return taxonomy.map_va(text_vocab, music_vocab, lexicon)
    if scheme == taxonomy.W2V:
        if embeddings is None:
            raise ConfigError("scheme w2v needs an embeddings path")
        return taxonomy.map_w2v(text_vocab, music_vocab, embeddings)
    map_file = config.path("map_file")
    if map_file:
        return taxonomy.read_map_tsv(map_file)
    dataset = config.values["manual_dataset"].strip()
    if dataset:
        return taxonomy.manual_map(dataset)
    raise ConfigError("scheme manual needs map_file or manual_dataset")


def load_experiment(config):
    """Load and validate everything a run needs; no outputs are written here."""
    strategy = config.strategy_config()
    text = load_features(config.path("text_features", required=True))
    music = load_features(config.path("music_features", required=True))
    text_vocab = Vocabulary.from_table(text)
    music_vocab = Vocabulary.from_table(music)

    lexicon = None
    if config.path("lexicon"):
        lexicon = load_vad_lexicon(config.path("lexicon"))
    embeddings = None
    if config.path("embeddings"):
        embeddings = load_word_embeddings(config.path("embeddings"))

    if strategy.kind == VA_REGRESSION and lexicon is None:
        raise ConfigError("va_regression needs a lexicon path")
    if strategy.kind in (W2V_REGRESSION, METRIC_3BRANCH) and embeddings is None:
        raise ConfigError(f"{strategy.kind} needs an embeddings path")

    tax_map = build_tax_map(config, text_vocab, music_vocab, lexicon, embeddings)
    text_split = stratified_split(text, config.split_ratios, config.split_seed)
    music_split = stratified_split(music, config.split_ratios, config.split_seed)
    return Experiment(config, strategy, text, music, text_vocab, music_vocab,
                      lexicon, embeddings, tax_map, text_split, music_split)


# ----------------------------------------------------------------------
# training

def _labeled_batches(records, batch_size, rng):
    order = rng.permutation(len(records))
    shuffled = [records[i] for i in order]
    return [LabeledBatch(shuffled[i:i + batch_size])
            for i in range(0, len(shuffled), batch_size)]


def _triplet_step_batches(streams, batch_size):
    """Chunk each stream and line the chunks up into per-step batch groups."""
    chunked = [[s.slice(i, i + batch_size) for i in range(0, len(s), batch_size)]
               for s in streams]
    steps = max((len(c) for c in chunked), default=0)
    groups = []
    for i in range(steps):
        group = [c[i] for c in chunked if i < len(c)]
        groups.append(group)
    return groups


@dataclass
class TrainResult:
    params: ModelParams
    best_epoch: int
    best_val_mrr: float
    log: list


def train(config, experiment=None, quiet=True):
    """Train one strategy with early stopping on validation macro MRR."""
    exp = experiment or load_experiment(config)
    strategy = exp.strategy
    word_dim = exp.embeddings.dim if exp.embeddings is not None else None
    params = init_model(strategy, exp.text.dim, exp.music.dim,
                        exp.text_vocab, exp.music_vocab, word_dim)
    states = {name: AdamState.fresh(p, config.lr)
              for name, p in params.branches.items()}
    data = TrainingData(text=exp.text, music=exp.music, lexicon=exp.lexicon,
                        embeddings=exp.embeddings)
    train_text, train_music = exp.tables(TRAIN)
    val_text, val_music = exp.tables(VAL)
    miner_cfg = config.miner_config(strategy.embedding_dim)
    rng = np.random.default_rng(config.seed)
    digest = config.digest()

    def validate(p):
        report = evaluate(p, strategy, val_text, val_music, exp.tax_map,
                          seed=config.seed, config_digest=digest)
        return report.macro_mrr, report.macro_p5

    log = []
    if config.max_epochs > 0:
        val_mrr, val_p5 = validate(params)
        log.append({"epoch": 0, "train_loss": None,
                    "val_macro_mrr": val_mrr, "val_macro_p5": val_p5})
        best = (val_mrr, 0, params.copy())
    else:
        best = (float("nan"), 0, params.copy())

    for epoch in range(1, config.max_epochs + 1):
        if strategy.kind in CLASSIFIER_KINDS or strategy.kind in REGRESSION_KINDS:
            all_records = list(train_text) + list(train_music)
            step_batches = _labeled_batches(all_records, config.batch_size, rng)
        else:
            streams = sampling.build_epoch_triplets(
                train_text, train_music, exp.tax_map, params, strategy,
                miner_cfg, rng, embeddings=exp.embeddings)
            step_batches = _triplet_step_batches(streams, config.batch_size)

        losses = []
        for batch in step_batches:
            loss, grads = strategy_loss(params, strategy, batch, data)
            losses.append(loss)
            for name in sorted(params.branches):
                params.branches[name], states[name] = adam_step(
                    params.branches[name], grads[name], states[name])

        val_mrr, val_p5 = validate(params)
        log.append({"epoch": epoch,
                    "train_loss": float(np.mean(losses)) if losses else None,
                    "val_macro_mrr": val_mrr, "val_macro_p5": val_p5})
        if not quiet:
            print(f"epoch {epoch:3d}  loss {log[-1]['train_loss']:.5f}  "
                  f"val MRR {val_mrr:.4f}")
        if val_mrr > best[0]:
            best = (val_mrr, epoch, params.copy())
        elif epoch - best[1] >= config.patience:
            break

    return TrainResult(params=best[2], best_epoch=best[1],
                       best_val_mrr=best[0], log=log)


def run_training(config, quiet=True):
    """train() plus artifacts: checkpoint and JSON log under out_dir."""
    exp = load_experiment(config)
    result = train(config, experiment=exp, quiet=quiet)
    os.makedirs(config.out_dir, exist_ok=True)
    digest = config.digest()
    ckpt_path = os.path.join(config.out_dir, f"{config.strategy}.ckpt")
    save_checkpoint(result.params, exp.strategy, ckpt_path, meta={
        "config_digest": digest,
        "best_epoch": result.best_epoch,
        "best_val_mrr": result.best_val_mrr,
    })
    log_path = os.path.join(config.out_dir, f"{config.strategy}.log.json")
    with open(log_path, "w", encoding="utf-8") as fh:
        json.dump({"config_digest": digest, "epochs": result.log,
                   "best_epoch": result.best_epoch,
                   "best_val_mrr": result.best_val_mrr},
                  fh, sort_keys=True, indent=2)
        fh.write("\n")
    return ckpt_path, log_path


def evaluate_checkpoint(config, ckpt_path, scheme=None, split=TEST):
    """Load a checkpoint and score it on a held-out split."""
    exp = load_experiment(config)
    params, strategy, _meta = load_checkpoint(ckpt_path)
    scheme = scheme.upper() if scheme else None
    tax_map = (exp.tax_map if scheme in (None, exp.tax_map.scheme)
               else build_tax_map(config, exp.text_vocab, exp.music_vocab,
                                  exp.lexicon, exp.embeddings, scheme=scheme))
    text_eval, music_eval = exp.tables(split)
    return evaluate(params, strategy, text_eval, music_eval, tax_map,
                    seed=config.seed, config_digest=config.digest())


# ----------------------------------------------------------------------
# strategy comparison grids

def run_suite(configs, schemes=None, quiet=True):
    """Train every config and score it under each mapping scheme.

    Configs must share their data paths and split settings so the rows are
    comparable. Returns (scheme list, rows) where each row is
    (strategy, {scheme: (p5, mrr)}).
    """
    if not configs:
        raise ConfigError("run_suite needs at least one config")
    shared_keys = ("text_features", "music_features", "lexicon", "embeddings",
                   "map_file", "manual_dataset", "split_ratios", "split_seed")
    for cfg in configs[1:]:
        for key in shared_keys:
            if cfg.values[key] != configs[0].values[key]:
                raise ConfigError(
                    f"suite configs disagree on {key!r}; rows would not be comparable")
    schemes = [s.upper() for s in (schemes or [configs[0].scheme])]
    rows = []
    for cfg in configs:
        exp = load_experiment(cfg)
        result = train(cfg, experiment=exp, quiet=quiet)
        cells = {}
        for scheme in schemes:
            tax_map = (exp.tax_map if scheme == exp.tax_map.scheme
                       else build_tax_map(cfg, exp.text_vocab, exp.music_vocab,
                                          exp.lexicon, exp.embeddings,
                                          scheme=scheme))
            text_eval, music_eval = exp.tables(TEST)
            report = evaluate(result.params, exp.strategy, text_eval,
                              music_eval, tax_map, seed=cfg.seed,
                              config_digest=cfg.digest())
            cells[scheme] = (report.macro_p5, report.macro_mrr)
        rows.append((cfg.strategy, cells))
        if not quiet:
            print(f"{cfg.strategy}: " + "  ".join(
                f"{s} P@5={cells[s][0]:.4f} MRR={cells[s][1]:.4f}" for s in schemes))
    return schemes, rows


def suite_table(schemes, rows, digest=""):
    """Format a suite result as a TSV grid."""
    header = ["strategy"]
    for s in schemes:
        header += [f"{s.lower()}_p5", f"{s.lower()}_mrr"]
    lines = []
    if digest:
        lines.append(f"# config_digest: {digest}")
    lines.append("\t".join(header))
    for strategy, cells in rows:
        row = [strategy]
        for s in schemes:
            p5, mrr = cells[s]
            row += [f"{p5:.4f}", f"{mrr:.4f}"]
        lines.append("\t".join(row))
    return "\n".join(lines) + "\n"
