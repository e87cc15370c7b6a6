"""Shared domain types and deterministic randomness plumbing."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

DEFAULT_MAX_LEN = 50

# Stream purpose tags. Fixed integers: they are part of every derived
# stream's key, so renumbering them changes all downstream randomness.
TAG_MUTATE = 1
TAG_CROSSOVER = 2
TAG_SELECT = 3
TAG_SAMPLE = 4
TAG_BASELINE = 5
TAG_DATA = 6
TAG_TARGET = 7


@dataclass(frozen=True)
class SeedSpec:
    """Master seed for a run; child streams are keyed by integer tag lists."""

    master_seed: int


def derive_stream(seed: SeedSpec | int, tags: Sequence[int]) -> np.random.Generator:
    """Return a pseudo-random stream fully determined by (master_seed, *tags).

    The key is hashed with SHA-256, so equal inputs yield bit-identical
    streams on every platform and in any evaluation order. Python's salted
    ``hash()`` must never be used for this.
    """
    if len(tags) == 0:
        raise ValueError("tags must be non-empty")
    master = seed.master_seed if isinstance(seed, SeedSpec) else int(seed)
    key = "|".join(str(int(t)) for t in (master, *tags)).encode("ascii")
    entropy = int.from_bytes(hashlib.sha256(key).digest()[:8], "big")
    return np.random.default_rng(entropy)


@dataclass(frozen=True)
class Catalog:
    """Dense 0-based item universe with optional external-id labels."""

    num_items: int
    item_labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.num_items < 2:
            raise ValueError("a catalog needs at least 2 items")
        if self.item_labels is not None and len(self.item_labels) != self.num_items:
            raise ValueError("item_labels length must equal num_items")

    def label(self, item: int) -> str:
        if self.item_labels is None:
            return str(item)
        return self.item_labels[item]


@dataclass(frozen=True)
class CategoryMap:
    """Category-id sets per item over a fixed category universe."""

    categories_of: tuple[frozenset[int], ...]
    num_categories: int
    category_labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        for item, cats in enumerate(self.categories_of):
            for c in cats:
                if not 0 <= c < self.num_categories:
                    raise ValueError(f"item {item} has out-of-range category {c}")
        if self.category_labels is not None and len(self.category_labels) != self.num_categories:
            raise ValueError("category_labels length must equal num_categories")

    def of(self, item: int) -> frozenset[int]:
        return self.categories_of[item]

    def members(self, category: int) -> tuple[int, ...]:
        """Items carrying the given category, in ascending item order."""
        return tuple(i for i, cats in enumerate(self.categories_of) if category in cats)

    def category_id(self, name_or_id: str | int) -> int:
        """Resolve a category label or numeric id string to its dense id."""
        if isinstance(name_or_id, int):
            cid = name_or_id
        elif self.category_labels is not None and name_or_id in self.category_labels:
            cid = self.category_labels.index(name_or_id)
        else:
            try:
                cid = int(name_or_id)
            except ValueError:
                raise ValueError(f"unknown category {name_or_id!r}") from None
        if not 0 <= cid < self.num_categories:
            raise ValueError(f"category id {cid} out of range")
        return cid


@dataclass(frozen=True)
class UserSequence:
    """A temporally ordered, duplicate-free item sequence for one user."""

    user: int
    items: tuple[int, ...]
    max_len: int = DEFAULT_MAX_LEN

    def __post_init__(self) -> None:
        if self.user < 1:
            raise ValueError("user ids are positive integers")
        if not 1 <= len(self.items) <= self.max_len:
            raise ValueError(
                f"sequence length {len(self.items)} outside [1, {self.max_len}]"
            )
        if len(set(self.items)) != len(self.items):
            raise ValueError("sequence contains duplicate items")
        if any(i < 0 for i in self.items):
            raise ValueError("item ids are non-negative integers")

    def __len__(self) -> int:
        return len(self.items)


def as_items(seq: "UserSequence | Iterable[int]") -> tuple[int, ...]:
    """Accept a UserSequence or any iterable of item ids; return a tuple."""
    if isinstance(seq, UserSequence):
        return seq.items
    return tuple(seq)
