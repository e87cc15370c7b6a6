"""Genetic search for minimal sequence edits that flip a recommender.

The search evolves a population seeded with copies of the source sequence.
Each generation appends mutants (replace / add / delete, one edit each) and
single-cut crossover children to the pool, scores everything through the
black-box model, and keeps the best `population_size` individuals by a
fitness that blends normalized edit distance with the regime's objective
loss. Selection ranks distinct sequences (clones of a front-runner would
otherwise take over the population within a few generations); slots left
over when few distinct sequences exist are padded with duplicates.
Validity never steers evolution; it is only applied when the final
population is harvested for the closest valid candidate.

Everything is reproducible: randomness comes from streams keyed by
(master seed, purpose, user, generation), and fitness evaluation is pure,
so worker counts change wall time but never results.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import (
    DEFAULT_MAX_LEN,
    TAG_CROSSOVER,
    TAG_MUTATE,
    TAG_SELECT,
    Catalog,
    CategoryMap,
    UserSequence,
    as_items,
    derive_stream,
)
from .metrics import NULL_ITEM, hamming, levenshtein_batch
from .models import ScoreVector, score_batch_logits, softmax, top_k
from .objective import SettingSpec, is_valid, loss_weights, valid_from_topk
from .records import ExplanationRecord

MUTATION_KINDS = ("replace", "add", "delete")


@dataclass(frozen=True)
class GaConfig:
    """Search hyperparameters; the defaults are the reference configuration."""

    generations: int = 30
    population_size: int = 8192
    mutation_prob: float = 0.5
    crossover_prob: float = 0.7
    edit_weight: float = 0.5
    max_len: int = DEFAULT_MAX_LEN
    elitism_fraction: float = 1.0
    mutation_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self) -> None:
        if self.generations < 1:
            raise ValueError("generations must be >= 1")
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        for name in ("mutation_prob", "crossover_prob", "edit_weight", "elitism_fraction"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if len(self.mutation_weights) != 3 or any(w < 0 for w in self.mutation_weights):
            raise ValueError("mutation_weights are 3 non-negative reals")
        if self.max_len < 1:
            raise ValueError("max_len must be >= 1")


@dataclass(slots=True)
class _Eval:
    fitness: float
    loss: float
    lev: int
    valid: bool
    topk_ids: tuple[int, ...]
    topk_scores: tuple[float, ...]


@dataclass(slots=True)
class Candidate:
    """One individual: an item tuple plus the generation that created it."""

    items: tuple[int, ...]
    born: int
    ev: _Eval | None = None


def _num_items(catalog: "Catalog | int") -> int:
    return catalog.num_items if isinstance(catalog, Catalog) else int(catalog)


def _draw_unseen(items: tuple[int, ...], m: int, rng: np.random.Generator) -> int:
    present = set(items)
    if len(present) >= m:
        raise ValueError("catalog exhausted: every item already in the sequence")
    while True:
        z = int(rng.integers(m))
        if z not in present:
            return z


def mutate_replace(seq, catalog, rng: np.random.Generator) -> tuple[int, ...]:
    """Overwrite one uniformly random position with an item not in the sequence."""
    items = as_items(seq)
    i = int(rng.integers(len(items)))
    z = _draw_unseen(items, _num_items(catalog), rng)
    return items[:i] + (z,) + items[i + 1 :]


def mutate_add(seq, catalog, rng: np.random.Generator, max_len: int = DEFAULT_MAX_LEN) -> tuple[int, ...]:
    """Insert an unseen item at a random slot; overflow drops the oldest item."""
    items = as_items(seq)
    i = int(rng.integers(len(items) + 1))
    z = _draw_unseen(items, _num_items(catalog), rng)
    out = items[:i] + (z,) + items[i:]
    if len(out) > max_len:
        out = out[1:]
    return out


def mutate_delete(seq, rng: np.random.Generator) -> tuple[int, ...]:
    """Remove one uniformly random position, shifting the suffix left."""
    items = as_items(seq)
    if len(items) < 2:
        raise ValueError("cannot delete from a length-1 sequence")
    i = int(rng.integers(len(items)))
    return items[:i] + items[i + 1 :]


def _dedup_keep_first(items: tuple[int, ...]) -> tuple[int, ...]:
    seen: set[int] = set()
    out = []
    for x in items:
        if x not in seen:
            seen.add(x)
            out.append(x)
    return tuple(out)


def crossover(
    parent1, parent2, rng: np.random.Generator, max_len: int = DEFAULT_MAX_LEN
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Single-cut recombination; duplicate repair drops later occurrences."""
    p1, p2 = as_items(parent1), as_items(parent2)
    c1 = int(rng.integers(1, len(p1) + 1))
    c2 = int(rng.integers(1, len(p2) + 1))
    child1 = _dedup_keep_first(p1[:c1] + p2[c2:])[-max_len:]
    child2 = _dedup_keep_first(p2[:c2] + p1[c1:])[-max_len:]
    return child1, child2


def combine_fitness(lev: float, loss: float, edit_weight: float, max_len: int) -> float:
    return edit_weight * (lev / max_len) + (1.0 - edit_weight) * loss


def fitness(
    source,
    source_scores: ScoreVector,
    cand,
    cand_scores: ScoreVector,
    setting: SettingSpec,
    edit_weight: float = 0.5,
    max_len: int = DEFAULT_MAX_LEN,
    categories: CategoryMap | None = None,
) -> float:
    """Stand-alone fitness of one scored candidate (lower is better)."""
    from .metrics import levenshtein
    from .objective import objective_loss

    lev = levenshtein(as_items(source), as_items(cand))
    loss = objective_loss(setting, source_scores, cand_scores, categories)
    return combine_fitness(lev, loss, edit_weight, max_len)


class _Evaluator:
    """Batch fitness evaluation with a per-run cache keyed by item tuples."""

    def __init__(self, model, setting, source_items, k, config, categories, threads):
        self.model = model
        self.setting = setting
        self.source_items = source_items
        self.k = k
        self.config = config
        self.categories = categories
        self.threads = max(1, int(threads))
        self.m = model.num_items
        self.source_scores = model.score(source_items)
        self.source_top1 = top_k(self.source_scores, 1)[0]
        self.weights, self.targeted_loss = loss_weights(
            setting, self.source_scores, self.m, categories
        )
        self.cache: dict[tuple[int, ...], _Eval] = {}

    def _score_logits(self, rows: np.ndarray, lengths: np.ndarray) -> np.ndarray:
        if self.threads == 1 or rows.shape[0] < 2 * self.threads:
            return score_batch_logits(self.model, rows, lengths)
        chunks = np.array_split(np.arange(rows.shape[0]), self.threads)
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            parts = list(
                pool.map(lambda idx: score_batch_logits(self.model, rows[idx], lengths[idx]), chunks)
            )
        return np.vstack(parts)

    def evaluate(self, candidates: list[Candidate]) -> None:
        fresh: dict[tuple[int, ...], None] = {}
        for cand in candidates:
            if cand.items not in self.cache:
                fresh[cand.items] = None
        if fresh:
            seqs = list(fresh)
            width = max(len(s) for s in seqs)
            rows = np.full((len(seqs), width), NULL_ITEM, dtype=np.int64)
            lengths = np.empty(len(seqs), dtype=np.int64)
            for b, s in enumerate(seqs):
                rows[b, : len(s)] = s
                lengths[b] = len(s)
            norm = softmax(self._score_logits(rows, lengths))
            levs = levenshtein_batch(self.source_items, rows, lengths)
            mass = norm @ self.weights
            losses = 1.0 - mass if self.targeted_loss else mass
            kk = min(max(self.k, 1), self.m)
            if kk == 1:
                # argmax picks the first max, which is the ascending-id tie-break
                order = np.argmax(norm, axis=-1)[:, None]
            else:
                ids_grid = np.broadcast_to(np.arange(self.m), norm.shape)
                order = np.lexsort((ids_grid, -norm), axis=-1)[:, :kk]
            top_scores = np.take_along_axis(norm, order, axis=-1)
            for b, s in enumerate(seqs):
                top_ids = tuple(int(i) for i in order[b])
                scores = tuple(float(x) for x in top_scores[b])
                self.cache[s] = _Eval(
                    fitness=combine_fitness(
                        int(levs[b]), float(losses[b]), self.config.edit_weight, self.config.max_len
                    ),
                    loss=float(losses[b]),
                    lev=int(levs[b]),
                    valid=valid_from_topk(
                        self.setting, self.source_top1, top_ids, scores, self.k, self.categories
                    ),
                    topk_ids=top_ids,
                    topk_scores=scores,
                )
        for cand in candidates:
            cand.ev = self.cache[cand.items]


def _pick_kind(
    items: tuple[int, ...], m: int, weights: tuple[float, float, float], rng: np.random.Generator
) -> str | None:
    has_unseen = len(items) < m
    applicable = []
    for kind, w in zip(MUTATION_KINDS, weights):
        if w <= 0:
            continue
        if kind in ("replace", "add") and not has_unseen:
            continue
        if kind == "delete" and len(items) < 2:
            continue
        applicable.append((kind, w))
    if not applicable:
        return None
    total = sum(w for _, w in applicable)
    u = rng.random() * total
    acc = 0.0
    for kind, w in applicable:
        acc += w
        if u < acc:
            return kind
    return applicable[-1][0]


def genetic(
    source,
    setting: SettingSpec,
    model,
    k: int,
    config: GaConfig = GaConfig(),
    seed: int = 0,
    categories: CategoryMap | None = None,
    threads: int = 1,
    on_generation: Callable[[int, list[Candidate]], None] | None = None,
) -> list[Candidate]:
    """Run the evolutionary loop and return the final population by fitness."""
    source_items = as_items(source)
    user = source.user if isinstance(source, UserSequence) else 0
    m = model.num_items
    if not 1 <= k <= m:
        raise ValueError(f"k={k} outside [1, {m}]")
    # candidates never use the whole catalog: replacement needs a spare item
    # and masking scorers need at least one scoreable item
    max_len = min(config.max_len, m - 1)
    if len(source_items) > max_len:
        raise ValueError(f"source length {len(source_items)} exceeds limit {max_len}")

    evaluator = _Evaluator(model, setting, source_items, k, config, categories, threads)
    n = config.population_size
    population = [Candidate(items=source_items, born=0) for _ in range(n)]
    evaluator.evaluate(population)
    sort_key = lambda c: (c.ev.fitness, c.items)  # noqa: E731

    for gen in range(1, config.generations + 1):
        m_rng = derive_stream(seed, [TAG_MUTATE, user, gen])
        mutants: list[Candidate] = []
        for cand in population:
            if m_rng.random() >= config.mutation_prob:
                continue
            kind = _pick_kind(cand.items, m, config.mutation_weights, m_rng)
            if kind is None:
                continue
            if kind == "replace":
                items = mutate_replace(cand.items, m, m_rng)
            elif kind == "add":
                items = mutate_add(cand.items, m, m_rng, max_len)
            else:
                items = mutate_delete(cand.items, m_rng)
            mutants.append(Candidate(items=items, born=gen))

        pool = population + mutants
        c_rng = derive_stream(seed, [TAG_CROSSOVER, user, gen])
        order = c_rng.permutation(len(pool))
        children: list[Candidate] = []
        for j in range(0, len(pool) - 1, 2):
            if c_rng.random() >= config.crossover_prob:
                continue
            a, b = pool[int(order[j])], pool[int(order[j + 1])]
            c1, c2 = crossover(a.items, b.items, c_rng, max_len)
            children.append(Candidate(items=c1, born=gen))
            children.append(Candidate(items=c2, born=gen))
        pool.extend(children)

        evaluator.evaluate(pool)
        pool.sort(key=sort_key)
        # select over distinct sequences: clones of one strong candidate
        # would otherwise flood truncation selection and stall the search
        seen: set[tuple[int, ...]] = set()
        distinct = []
        for cand in pool:
            if cand.items not in seen:
                seen.add(cand.items)
                distinct.append(cand)
        n_best = int(round(n * config.elitism_fraction))
        if n_best >= n or len(distinct) <= n:
            population = distinct[:n]
        else:
            s_rng = derive_stream(seed, [TAG_SELECT, user, gen])
            rest = distinct[n_best:]
            picked = s_rng.choice(len(rest), size=n - n_best, replace=False)
            population = distinct[:n_best] + [rest[int(i)] for i in np.sort(picked)]
        pad = 0
        while len(population) < n:  # fewer distinct sequences than slots
            population.append(population[pad])
            pad += 1
        if on_generation is not None:
            on_generation(gen, population)

    population.sort(key=sort_key)
    return population


def explain(
    source: UserSequence,
    setting: SettingSpec,
    model,
    k: int,
    config: GaConfig = GaConfig(),
    seed: int = 0,
    categories: CategoryMap | None = None,
    threads: int = 1,
    method: str = "gece",
) -> ExplanationRecord:
    """Harvest the closest valid candidate from the evolved population.

    Among final-population candidates valid at rank k, the winner minimizes
    edit distance (ties: lower objective loss, then lexicographic items).
    No valid candidate is a legitimate outcome, recorded as an absent
    counterfactual.
    """
    population = genetic(
        source, setting, model, k, config, seed, categories=categories, threads=threads
    )
    source_items = as_items(source)
    valid_cands = [c for c in population if c.ev is not None and c.ev.valid]
    m = model.num_items
    ks = [kk for kk in setting.k_eval if kk <= m]
    if not valid_cands:
        return ExplanationRecord(
            user=source.user if isinstance(source, UserSequence) else 0,
            method=method,
            setting=setting,
            source=source_items,
            counterfactual=None,
            valid_at_k={kk: False for kk in ks},
            hamming=None,
            levenshtein=None,
            generation_found=None,
            seed=seed,
        )
    winner = min(valid_cands, key=lambda c: (c.ev.lev, c.ev.loss, c.items))
    src_scores = model.score(source_items)
    cf_scores = model.score(winner.items)
    return ExplanationRecord(
        user=source.user if isinstance(source, UserSequence) else 0,
        method=method,
        setting=setting,
        source=source_items,
        counterfactual=winner.items,
        valid_at_k={kk: is_valid(setting, src_scores, cf_scores, kk, categories) for kk in ks},
        hamming=hamming(source_items, winner.items),
        levenshtein=winner.ev.lev,
        generation_found=winner.born,
        seed=seed,
    )
