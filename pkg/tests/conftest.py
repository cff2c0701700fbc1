"""Shared builders for synthetic corpora, stores, and embedding fixtures."""

import json
from pathlib import Path

import numpy as np

from wic_disagree.data_model import (
    Instance,
    Usage,
    write_instances_tsv,
    write_usages_tsv,
)
from wic_disagree.embedding_store import write_store


def pair_with_cosine(rng, d, cos_value, scale1=1.0, scale2=1.0):
    """An embedding pair whose cosine similarity equals cos_value (to rounding)."""
    u = rng.normal(size=d)
    u /= np.linalg.norm(u)
    w = rng.normal(size=d)
    w -= (w @ u) * u
    w /= np.linalg.norm(w)
    e2 = cos_value * u + np.sqrt(1.0 - cos_value * cos_value) * w
    return scale1 * u, scale2 * e2


def separable_ogwic_arrays(n, d, seed):
    """Pairs whose label is a noiseless monotone function of their cosine.

    Labels occupy four cosine bands with clear gaps around the band
    boundaries, so any threshold inside a gap classifies perfectly.
    """
    rng = np.random.default_rng(seed)
    bands = [(-0.88, -0.50), (-0.40, -0.05), (0.05, 0.40), (0.50, 0.88)]
    labels = rng.integers(1, 5, size=n)
    E1 = np.empty((n, d))
    E2 = np.empty((n, d))
    for i, label in enumerate(labels):
        cos_value = rng.uniform(*bands[label - 1])
        s1, s2 = rng.uniform(0.5, 2.0, size=2)
        E1[i], E2[i] = pair_with_cosine(rng, d, cos_value, s1, s2)
    return E1, E2, labels


def affine_diswic_arrays(n, d, seed, noise=0.1):
    """Pairs whose target is affine in ||e1 - e2|| plus relative noise.

    e2 = e1 + t * g for a fixed direction g, so the distance is also exactly
    linear in the concatenated features and the linear baseline can recover it.
    """
    rng = np.random.default_rng(seed)
    g = rng.normal(size=d)
    g /= np.linalg.norm(g)
    E1 = rng.normal(size=(n, d))
    t = rng.uniform(0.0, 2.0, size=n)
    E2 = E1 + t[:, None] * g
    y_clean = 2.0 * t + 0.5
    y = y_clean + rng.normal(scale=noise * y_clean.std(), size=n)
    return E1, E2, y


# ratings templates cycled over instances; `l` is the band label of the pair
def _ratings_cycle(k, label):
    lo = max(1, label - 1)
    hi = min(4, label + 1)
    patterns = [
        (label, label, label),
        (label, label),
        (lo, label, hi),  # median = label, nonzero disagreement
        (1, 2),  # half-integer median: excluded from the ordinal task
        (label,),  # single rating: excluded from the disagreement task
        (label, label, label, label),
    ]
    return patterns[k % len(patterns)]


def build_corpus(root, n_per_lang=24, d=8, seed=13, languages=("de", "en")):
    """Write a small synthetic corpus (TSVs + store + config) under `root`.

    Returns a dict of paths; the config covers both tasks' required keys and
    uses fast hyperparameter overrides.
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    bands = [(-0.88, -0.50), (-0.40, -0.05), (0.05, 0.40), (0.50, 0.88)]

    usages, instances, records = [], [], []
    for lang in languages:
        for i in range(n_per_lang):
            label = i % 4 + 1
            left = f"the sense of bank number {i} on the {lang} side"
            right = f"a bank appearing again as usage {i} for {lang}"
            u1 = Usage(usage_id=f"{lang}-u{2 * i}", context=left, lemma="bank",
                       target_start=left.index("bank"),
                       target_end=left.index("bank") + 4, language=lang)
            u2 = Usage(usage_id=f"{lang}-u{2 * i + 1}", context=right, lemma="bank",
                       target_start=right.index("bank"),
                       target_end=right.index("bank") + 4, language=lang)
            usages.extend([u1, u2])
            cos_value = rng.uniform(*bands[label - 1])
            e1, e2 = pair_with_cosine(rng, d, cos_value,
                                      *rng.uniform(0.5, 2.0, size=2))
            iid = f"{lang}-i{i}"
            instances.append(Instance(instance_id=iid, usage_1=u1.usage_id,
                                      usage_2=u2.usage_id, lemma="bank",
                                      language=lang,
                                      ratings=_ratings_cycle(i, label)))
            records.append((iid, e1.astype(np.float32), e2.astype(np.float32)))

    paths = {
        "usages": root / "usages.tsv",
        "instances": root / "instances.tsv",
        "store": root / "embeddings.wice",
        "output_dir": root / "out",
        "config": root / "config.json",
    }
    write_usages_tsv(usages, paths["usages"])
    write_instances_tsv(instances, paths["instances"])
    write_store(records, paths["store"])
    write_config(paths, task="ogwic", method="baseline")
    return paths


def write_config(paths, **overrides):
    """(Re)write the experiment config next to the corpus files."""
    config = {
        "usages": str(paths["usages"]),
        "instances": str(paths["instances"]),
        "store": str(paths["store"]),
        "output_dir": str(paths["output_dir"]),
        "task": "ogwic",
        "method": "baseline",
        "seed": 42,
        "neural": {"epochs": 2, "bottleneck": 8, "hidden": [16, 8]},
        "gbdt": {"n_rounds": 6, "max_depth": 3},
    }
    config.update(overrides)
    Path(paths["config"]).write_text(json.dumps(config, indent=2),
                                     encoding="utf-8")
    return paths["config"]
