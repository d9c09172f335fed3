"""Shared fixtures and oracle helpers.

Gradient tests perturb parameters by h = 1e-5; an instance is only usable
if no ReLU pre-activation or hinge sits within a kink's reach of zero,
otherwise central differences straddle the kink and measure garbage.
Instances are drawn from a deterministic seed sequence and unsafe ones are
skipped, so the suite stays reproducible without being flaky.
"""

import numpy as np
import pytest

from moodbridge.features import (
    MUSIC,
    TEXT,
    FeatureRecord,
    FeatureTable,
    VadLexicon,
    Vocabulary,
    WordEmbeddingTable,
)
from moodbridge.models import (
    LabeledBatch,
    StrategyConfig,
    TrainingData,
    init_model,
    strategy_loss,
)
from moodbridge.numcore import (
    flatten_grads,
    flatten_params,
    max_relative_error,
    mlp_forward,
    unflatten_params,
)
from moodbridge.sampling import CROSS, TAG_MUSIC, TAG_TEXT, TripletBatch

KINK_MARGIN = 1e-3      # min |pre-activation| and |hinge| for FD safety
FD_H = 1e-5
GRAD_TOL = 1e-4

# filled by the acceptance module; printed after the run so the verdicts
# survive pytest's output capture
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for verdict, name, notes in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"  [{verdict}] {name}")
        for note in notes:
            terminalreporter.write_line(f"         {note}")

TEXT_TAGS = ("joyful", "gloomy")
MUSIC_TAGS = ("happy", "sad", "angry")


def tiny_world(seed, text_dim=4, music_dim=5, word_dim=3, n_text=6, n_music=6):
    """A minimal two-modality corpus with lexicon and tag embeddings."""
    rng = np.random.default_rng(seed)
    text = FeatureTable(TEXT, text_dim)
    music = FeatureTable(MUSIC, music_dim)
    for i in range(n_text):
        text.append(FeatureRecord(f"t{i}", TEXT, TEXT_TAGS[i % len(TEXT_TAGS)],
                                  rng.standard_normal(text_dim)))
    for i in range(n_music):
        music.append(FeatureRecord(f"m{i}", MUSIC, MUSIC_TAGS[i % len(MUSIC_TAGS)],
                                   rng.standard_normal(music_dim)))
    lexicon = VadLexicon()
    for i, tag in enumerate(TEXT_TAGS + MUSIC_TAGS):
        lexicon.add(tag, 0.1 + 0.15 * i, 0.85 - 0.12 * i)
    embeddings = WordEmbeddingTable(word_dim)
    for tag in TEXT_TAGS + MUSIC_TAGS:
        v = rng.standard_normal(word_dim)
        embeddings.add(tag, v / np.linalg.norm(v))
    return {
        "text": text,
        "music": music,
        "text_vocab": Vocabulary.from_table(text),
        "music_vocab": Vocabulary.from_table(music),
        "lexicon": lexicon,
        "embeddings": embeddings,
    }


def strategy_instance(kind, seed, hidden=(6, 5), embedding_dim=3):
    """(params, config, batch, data) for one FD test instance."""
    world = tiny_world(seed)
    config = StrategyConfig(kind=kind, embedding_dim=embedding_dim, margin=0.2,
                            hidden=hidden, seed=seed)
    params = init_model(config, world["text"].dim, world["music"].dim,
                        world["text_vocab"], world["music_vocab"],
                        word_dim=world["embeddings"].dim)
    data = TrainingData(text=world["text"], music=world["music"],
                        lexicon=world["lexicon"], embeddings=world["embeddings"])
    if kind in ("classifier", "multi_head", "va_regression", "w2v_regression"):
        batch = LabeledBatch(list(world["text"])[:3] + list(world["music"])[:3])
    elif kind == "metric_2branch":
        batch = TripletBatch(CROSS, [("t0", "m0", "m1"), ("t1", "m2", "m0")])
    else:
        batch = [
            TripletBatch(CROSS, [("t0", "m0", "m1"), ("t1", "m2", "m0")]),
            TripletBatch(TAG_TEXT, [("joyful", "t0", "t1"), ("gloomy", "t1", "t2")]),
            TripletBatch(TAG_MUSIC, [("happy", "m0", "m1"), ("sad", "m1", "m0")]),
        ]
    return params, config, batch, data


def _batch_inputs(batch, data):
    if isinstance(batch, LabeledBatch):
        return [(r.modality, r.features) for r in batch.records]
    rows = []
    batches = batch if isinstance(batch, (list, tuple)) else [batch]
    for tb in batches:
        for a, p, n in tb.triplets:
            side = MUSIC if tb.kind in (CROSS, TAG_MUSIC) else TEXT
            if tb.kind == CROSS:
                rows.append((TEXT, data.record(TEXT, a).features))
            rows.append((side, data.record(side, p).features))
            rows.append((side, data.record(side, n).features))
    return rows


def _tower_pass(params, config, modality, x):
    """Forward a record through its full trunk chain; (output, min |preact|)."""
    if config.kind == "multi_head":
        chain = [params.branch("text_trunk" if modality == TEXT else "music_trunk"),
                 params.branch("shared_trunk")]
    else:
        chain = [params.branch("text_trunk" if modality == TEXT else "music_trunk")]
    h = x
    min_pre = np.inf
    for mlp in chain:
        h, cache = mlp_forward(mlp, h)
        for z in cache.pre_acts[:-1]:
            min_pre = min(min_pre, float(np.min(np.abs(z))))
    return h, min_pre


def _unit_embedding(params, config, modality_or_tag, x_or_none, data):
    if x_or_none is None:       # tag anchor
        from moodbridge.models import embed_tag
        return embed_tag(params, config, modality_or_tag, data.embeddings).values
    y, _ = _tower_pass(params, config, modality_or_tag, x_or_none)
    return y / np.linalg.norm(y)


def instance_is_fd_safe(params, config, batch, data):
    """No pre-activation, hinge, or norm close enough to a kink to poison FD."""
    normalized = config.kind in ("w2v_regression", "metric_2branch",
                                 "metric_3branch")
    for modality, x in _batch_inputs(batch, data):
        y, min_pre = _tower_pass(params, config, modality, x)
        if min_pre < KINK_MARGIN:
            return False
        if normalized and np.linalg.norm(y) < 0.1:
            return False
    if isinstance(batch, LabeledBatch):
        return True
    # hinge safety: each triplet must sit clear of the clamp boundary
    batches = batch if isinstance(batch, (list, tuple)) else [batch]
    for tb in batches:
        side = MUSIC if tb.kind in (CROSS, TAG_MUSIC) else TEXT
        for a, p, n in tb.triplets:
            if tb.kind == CROSS:
                ea = _unit_embedding(params, config, TEXT,
                                     data.record(TEXT, a).features, data)
            else:
                ea = _unit_embedding(params, config, a, None, data)
            ep = _unit_embedding(params, config, side,
                                 data.record(side, p).features, data)
            en = _unit_embedding(params, config, side,
                                 data.record(side, n).features, data)
            hinge = (1.0 - ea @ ep) - (1.0 - ea @ en) + config.margin
            if abs(hinge) < KINK_MARGIN:
                return False
    return True


def fd_strategy_gradients(params, config, batch, data):
    """(worst relative error, per-branch errors) of analytic vs central FD."""
    _, grads = strategy_loss(params, config, batch, data)
    errors = {}
    for name in sorted(params.branches):
        branch = params.branches[name]
        flat0 = flatten_params(branch)

        def f(flat, _name=name, _branch=branch):
            params.branches[_name] = unflatten_params(flat, _branch)
            try:
                loss, _ = strategy_loss(params, config, batch, data)
            finally:
                params.branches[_name] = _branch
            return loss

        fd = np.zeros_like(flat0)
        for i in range(flat0.size):
            up, down = flat0.copy(), flat0.copy()
            up[i] += FD_H
            down[i] -= FD_H
            fd[i] = (f(up) - f(down)) / (2 * FD_H)
        errors[name] = max_relative_error(flatten_grads(grads[name]), fd)
    return max(errors.values()), errors


def safe_instances(kind, count, start_seed=0, max_tries=500):
    """First `count` FD-safe instances drawn from consecutive seeds."""
    out = []
    seed = start_seed
    while len(out) < count and seed < start_seed + max_tries:
        try:
            inst = strategy_instance(kind, seed)
            if instance_is_fd_safe(*inst):
                out.append(inst)
        except Exception:
            pass    # rare zero-norm draws at tiny widths are just skipped
        seed += 1
    if len(out) < count:
        raise RuntimeError(f"could not find {count} FD-safe instances for {kind}")
    return out


@pytest.fixture
def world():
    return tiny_world(0)
