"""Facts, sources, claims and the categorical to binary transformation.

A :class:`Dataset` stores binary claims in a compressed-by-fact layout so the
discovery algorithms can work on flat numpy arrays:

* ``fact_ptr[f]:fact_ptr[f+1]`` indexes the claims about fact ``f``
* ``claim_source`` / ``claim_value`` hold the claiming source and polarity

Categorical datasets additionally carry ``attr_ptr`` (facts of attribute ``a``
are ``attr_ptr[a]:attr_ptr[a+1]``, ordered by value id) and ``fact_value``.
"""
from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Iterator, NamedTuple, Sequence

import numpy as np


class ConflictError(ValueError):
    """Raised when one source claims two different values for one attribute."""


class InputError(ValueError):
    """Raised for malformed claim or ground-truth input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class Claim(NamedTuple):
    source: int
    fact: int
    value: int


@dataclass(frozen=True, eq=False)
class Dataset:
    n_sources: int
    n_facts: int
    fact_ptr: np.ndarray
    claim_source: np.ndarray
    claim_value: np.ndarray
    # categorical structure (None for plain binary datasets)
    attr_ptr: np.ndarray | None = None
    fact_value: np.ndarray | None = None
    # ground truth, -1 where unknown
    fact_truth: np.ndarray | None = None
    attr_truth: np.ndarray | None = None
    source_names: list[str] = field(default_factory=list)
    fact_names: list[str] = field(default_factory=list)
    attribute_names: list[str] = field(default_factory=list)
    value_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        for arr in (self.fact_ptr, self.claim_source, self.claim_value,
                    self.attr_ptr, self.fact_value, self.fact_truth, self.attr_truth):
            if arr is not None:
                arr.setflags(write=False)

    @property
    def n_claims(self) -> int:
        return int(self.claim_source.shape[0])

    @property
    def is_categorical(self) -> bool:
        return self.attr_ptr is not None

    @property
    def n_attributes(self) -> int:
        return 0 if self.attr_ptr is None else len(self.attr_ptr) - 1

    @property
    def has_truth(self) -> bool:
        if self.is_categorical:
            return self.attr_truth is not None and bool(np.any(self.attr_truth >= 0))
        return self.fact_truth is not None and bool(np.any(self.fact_truth >= 0))

    @cached_property
    def claim_fact(self) -> np.ndarray:
        return np.repeat(np.arange(self.n_facts), np.diff(self.fact_ptr))

    @cached_property
    def fact_attr(self) -> np.ndarray:
        if self.attr_ptr is None:
            raise ValueError("dataset has no categorical structure")
        return np.repeat(np.arange(self.n_attributes), np.diff(self.attr_ptr))

    def fact_sum(self, per_claim) -> np.ndarray:
        """Sum a per-claim quantity over the claims of each fact."""
        return np.bincount(self.claim_fact, weights=per_claim, minlength=self.n_facts)

    def claims(self) -> Iterator[Claim]:
        facts = self.claim_fact
        for s, f, v in zip(self.claim_source.tolist(), facts.tolist(),
                           self.claim_value.tolist()):
            yield Claim(s, f, v)

    def claiming_sources(self, fact: int) -> np.ndarray:
        return self.claim_source[self.fact_ptr[fact]:self.fact_ptr[fact + 1]]

    def categorical_index(self) -> dict[int, list[tuple[int, int]]]:
        """AttributeId -> [(ValueId, FactId), ...]."""
        if self.attr_ptr is None:
            return {}
        return {
            a: [(int(self.fact_value[f]), f)
                for f in range(self.attr_ptr[a], self.attr_ptr[a + 1])]
            for a in range(self.n_attributes)
        }

    def positive_claims(self) -> list[tuple[int, int, int]]:
        """Recover ``(source, attribute, value)`` triples from positive claims."""
        pos = self.claim_value == 1
        facts = self.claim_fact[pos]
        return sorted(zip(self.claim_source[pos].tolist(),
                          self.fact_attr[facts].tolist(),
                          self.fact_value[facts].tolist()))

    def with_truth(self, attr_truth: np.ndarray | None = None,
                   fact_truth: np.ndarray | None = None) -> Dataset:
        if attr_truth is not None:
            attr_truth = np.asarray(attr_truth, dtype=np.int64)
            fact_truth = _fact_truth_from_attr(self, attr_truth)
        elif fact_truth is not None:
            fact_truth = np.asarray(fact_truth, dtype=np.int8)
        return Dataset(
            self.n_sources, self.n_facts, self.fact_ptr, self.claim_source,
            self.claim_value, self.attr_ptr, self.fact_value, fact_truth, attr_truth,
            self.source_names, self.fact_names, self.attribute_names, self.value_names,
        )


def _fact_truth_from_attr(ds: Dataset, attr_truth: np.ndarray) -> np.ndarray:
    fact_attr = ds.fact_attr
    t = attr_truth[fact_attr]
    out = (ds.fact_value == t).astype(np.int8)
    out[t < 0] = -1
    return out


def _csr_by_fact(n_facts: int, src: np.ndarray, fact: np.ndarray, val: np.ndarray):
    order = np.lexsort((src, fact))
    src, fact, val = src[order], fact[order], val[order]
    counts = np.bincount(fact, minlength=n_facts)
    ptr = np.zeros(n_facts + 1, dtype=np.int64)
    np.cumsum(counts, out=ptr[1:])
    return ptr, src.astype(np.int64), val.astype(np.int8)


def binarize(categorical_claims: Iterable[Sequence[int]], n_sources: int | None = None,
             n_attributes: int | None = None) -> Dataset:
    """Turn ``(source, attribute, value)`` claims into a binary dataset.

    Every attribute contributes one fact per claimed value. A source claiming
    value X on attribute a makes a positive claim on (a, X) and negative claims
    on every other claimed value of a. Facts of an attribute are ordered by
    value id.
    """
    arr = np.asarray(list(categorical_claims) if not isinstance(categorical_claims, np.ndarray)
                     else categorical_claims, dtype=np.int64).reshape(-1, 3)
    if arr.size and arr.min() < 0:
        raise InputError("identifiers must be non-negative")
    n_sources = int(arr[:, 0].max() + 1 if arr.size else 0) if n_sources is None else n_sources
    n_attributes = int(arr[:, 1].max() + 1 if arr.size else 0) if n_attributes is None else n_attributes

    # dedupe identical claims, reject conflicting ones
    arr = np.unique(arr, axis=0) if arr.size else arr
    if arr.size:
        sa = arr[:, 0] * n_attributes + arr[:, 1]
        dup = np.flatnonzero(sa[1:] == sa[:-1])
        if dup.size:
            s, a = arr[dup[0], 0], arr[dup[0], 1]
            raise ConflictError(f"source {s} claims several values for attribute {a}")

    # facts = distinct (attribute, value) pairs, sorted
    av = np.unique(arr[:, 1:], axis=0) if arr.size else np.zeros((0, 2), dtype=np.int64)
    n_facts = len(av)
    omega = np.bincount(av[:, 0], minlength=n_attributes)
    attr_ptr = np.zeros(n_attributes + 1, dtype=np.int64)
    np.cumsum(omega, out=attr_ptr[1:])
    fact_value = av[:, 1].copy()

    # each categorical claim expands to |Omega_a| binary claims
    reps = omega[arr[:, 1]]
    src = np.repeat(arr[:, 0], reps)
    claimed = np.repeat(arr[:, 2], reps)
    start = np.repeat(attr_ptr[arr[:, 1]], reps)
    offs = np.arange(len(src)) - np.repeat(np.cumsum(reps) - reps, reps)
    fact = start + offs
    val = (fact_value[fact] == claimed).astype(np.int8)

    ptr, src, val = _csr_by_fact(n_facts, src, fact, val)
    return Dataset(n_sources, n_facts, ptr, src, val, attr_ptr, fact_value)


def from_binary_claims(claims: Iterable[Sequence[int]], n_sources: int | None = None,
                       n_facts: int | None = None) -> Dataset:
    arr = np.asarray(list(claims), dtype=np.int64).reshape(-1, 3)
    if arr.size and (arr.min() < 0 or arr[:, 2].max() > 1):
        raise InputError("ids must be non-negative and polarity in {0, 1}")
    n_sources = int(arr[:, 0].max() + 1 if arr.size else 0) if n_sources is None else n_sources
    n_facts = int(arr[:, 1].max() + 1 if arr.size else 0) if n_facts is None else n_facts
    arr = np.unique(arr, axis=0) if arr.size else arr
    if arr.size:
        key = arr[:, 0] * n_facts + arr[:, 1]
        dup = np.flatnonzero(key[1:] == key[:-1])
        if dup.size:
            raise ConflictError(
                f"source {arr[dup[0], 0]} makes contradicting claims on fact {arr[dup[0], 1]}")
    ptr, src, val = _csr_by_fact(n_facts, arr[:, 0], arr[:, 1], arr[:, 2])
    return Dataset(n_sources, n_facts, ptr, src, val)


# --------------------------------------------------------------------------
# statistics

def attribute_supports(dataset: Dataset) -> np.ndarray:
    """Positive-claim count per fact."""
    return dataset.fact_sum(dataset.claim_value).astype(np.int64)


def normalized_entropy(attribute: int, dataset: Dataset) -> float:
    lo, hi = dataset.attr_ptr[attribute], dataset.attr_ptr[attribute + 1]
    support = attribute_supports(dataset)[lo:hi]
    total = support.sum()
    if total == 0:
        raise ValueError(f"attribute {attribute} has no positive claims")
    if hi - lo == 1:
        return 0.0
    p = support[support > 0] / total
    return float(-(p * np.log(p)).sum() / np.log(hi - lo))


def normalized_entropies(dataset: Dataset) -> np.ndarray:
    """Normalized entropy of every attribute with at least one positive claim (NaN otherwise)."""
    support = attribute_supports(dataset).astype(float)
    n_attr = dataset.n_attributes
    omega = np.diff(dataset.attr_ptr)
    fact_attr = dataset.fact_attr
    total = np.bincount(fact_attr, weights=support, minlength=n_attr)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = support / total[fact_attr]
        terms = np.where(p > 0, -p * np.log(np.where(p > 0, p, 1.0)), 0.0)
        h = np.bincount(fact_attr, weights=terms, minlength=n_attr)
        out = np.where(omega > 1, h / np.log(np.maximum(omega, 2)), 0.0)
    out[total == 0] = np.nan
    return out


def source_accuracies(dataset: Dataset) -> np.ndarray:
    """Per-source fraction of correct claims (NaN for sources with nothing to score).

    Categorical datasets score the source's claimed value per attribute against
    the attribute truth; binary datasets score every claim against the fact truth.
    """
    if not dataset.has_truth:
        raise ValueError("dataset has no ground truth")
    truth = dataset.fact_truth[dataset.claim_fact]
    if dataset.is_categorical:
        mask = (dataset.claim_value == 1) & (truth >= 0)
        correct = truth[mask] == 1
    else:
        mask = truth >= 0
        correct = truth[mask] == dataset.claim_value[mask]
    src = dataset.claim_source[mask]
    n = np.bincount(src, minlength=dataset.n_sources)
    c = np.bincount(src, weights=correct, minlength=dataset.n_sources)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(n > 0, c / np.maximum(n, 1), np.nan)


def average_source_accuracy(dataset: Dataset) -> float:
    acc = source_accuracies(dataset)
    if np.all(np.isnan(acc)):
        raise ValueError("no source has a claim with known truth")
    return float(np.nanmean(acc))


@dataclass
class DatasetStats:
    entropy: np.ndarray
    mean_entropy: float
    avg_source_accuracy: float | None
    n_claims: int
    claim_frequency: np.ndarray

    @classmethod
    def of(cls, dataset: Dataset) -> DatasetStats:
        if dataset.is_categorical:
            ent = normalized_entropies(dataset)
            mean_ent = float(np.nanmean(ent)) if np.any(~np.isnan(ent)) else 0.0
            fact_attr = dataset.fact_attr
            src_attr = np.unique(dataset.claim_source * max(dataset.n_attributes, 1)
                                 + fact_attr[dataset.claim_fact])
            per_src = np.bincount(src_attr // max(dataset.n_attributes, 1),
                                  minlength=dataset.n_sources)
            freq = per_src / max(dataset.n_attributes, 1)
        else:
            ent = np.zeros(0)
            mean_ent = 0.0
            freq = np.bincount(dataset.claim_source, minlength=dataset.n_sources) / max(dataset.n_facts, 1)
        acc = average_source_accuracy(dataset) if dataset.has_truth else None
        return cls(ent, mean_ent, acc, dataset.n_claims, freq)


# --------------------------------------------------------------------------
# ingestion

_WS = re.compile(r"\s+")
_DATE_FORMATS = ("%Y-%m-%d", "%Y/%m/%d", "%d.%m.%Y", "%m/%d/%Y", "%d/%m/%Y",
                 "%b %d %Y", "%d %b %Y", "%B %d %Y", "%d %B %Y", "%Y%m%d",
                 "%Y-%m-%d %H:%M", "%m/%d/%Y %H:%M", "%Y-%m-%dT%H:%M:%S")


def normalize_value(value: str, parse_dates: bool = False) -> str:
    """Trim, lowercase, collapse internal whitespace; optionally reformat dates as ISO-8601."""
    out = _WS.sub(" ", value.strip().lower())
    if parse_dates:
        from datetime import datetime
        candidate = out.replace(",", "")
        for fmt in _DATE_FORMATS:
            try:
                parsed = datetime.strptime(candidate, fmt)
            except ValueError:
                continue
            return parsed.isoformat(sep=" ") if ("%H" in fmt) else parsed.date().isoformat()
    return out


class Interner:
    def __init__(self):
        self.ids: dict[str, int] = {}
        self.names: list[str] = []

    def __call__(self, key: str) -> int:
        idx = self.ids.get(key)
        if idx is None:
            idx = self.ids[key] = len(self.names)
            self.names.append(key)
        return idx


def _read_rows(path, expected: tuple[str, ...]) -> Iterator[tuple[int, list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise InputError("empty file", 1)
        header = [h.strip().lower() for h in header]
        if tuple(header[:len(expected)]) != expected:
            raise InputError(f"expected header {','.join(expected)}, got {','.join(header)}", 1)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < len(expected):
                raise InputError(f"expected {len(expected)} columns, got {len(row)}", lineno)
            yield lineno, row


def sniff_layout(path) -> str:
    with open(path, newline="", encoding="utf-8") as fh:
        header = [h.strip().lower() for h in next(csv.reader(fh), [])]
    if header[:3] == ["source", "attribute", "value"]:
        return "categorical"
    if header[:3] == ["source", "fact", "polarity"]:
        return "binary"
    raise InputError(f"unrecognized claims header: {','.join(header)}", 1)


def read_claims_csv(path, normalize: bool = False, parse_dates: bool = False,
                    hook: Callable[[str], str] | None = None) -> Dataset:
    """Read a claims CSV in either the categorical or the binary layout."""
    layout = sniff_layout(path)
    sources = Interner()
    if hook is None and (normalize or parse_dates):
        def hook(v):
            return normalize_value(v, parse_dates=parse_dates)
    if layout == "categorical":
        attrs, values = Interner(), Interner()
        rows = []
        for lineno, (s, a, v, *_) in _read_rows(path, ("source", "attribute", "value")):
            v = hook(v) if hook else v
            rows.append((sources(s.strip()), attrs(a.strip()), values(v)))
        ds = binarize(rows, n_sources=len(sources.names), n_attributes=len(attrs.names))
        return Dataset(ds.n_sources, ds.n_facts, ds.fact_ptr, ds.claim_source, ds.claim_value,
                       ds.attr_ptr, ds.fact_value, None, None, sources.names,
                       [f"{attrs.names[a]}={values.names[v]}"
                        for a, v in zip(ds.fact_attr.tolist(), ds.fact_value.tolist())],
                       attrs.names, values.names)
    facts = Interner()
    rows = []
    for lineno, (s, f, p, *_) in _read_rows(path, ("source", "fact", "polarity")):
        p = p.strip()
        if p not in ("0", "1"):
            raise InputError(f"polarity must be 0 or 1, got {p!r}", lineno)
        rows.append((sources(s.strip()), facts(f.strip()), int(p)))
    ds = from_binary_claims(rows, n_sources=len(sources.names), n_facts=len(facts.names))
    return Dataset(ds.n_sources, ds.n_facts, ds.fact_ptr, ds.claim_source, ds.claim_value,
                   source_names=sources.names, fact_names=facts.names)


def read_truth_csv(path, dataset: Dataset, normalize: bool = False,
                   parse_dates: bool = False) -> Dataset:
    """Attach ground truth to ``dataset``.

    Categorical truth rows whose attribute appears with two different values are
    dropped entirely. Truth values never claimed by any source stay attached to
    the attribute (the attribute can then never be resolved correctly).
    """
    if dataset.is_categorical:
        attr_ids = {n: i for i, n in enumerate(dataset.attribute_names)}
        value_ids = {n: i for i, n in enumerate(dataset.value_names)}
        seen: dict[int, str] = {}
        conflicted: set[int] = set()
        for lineno, (a, v, *_) in _read_rows(path, ("attribute", "value")):
            v = normalize_value(v, parse_dates) if (normalize or parse_dates) else v
            a_id = attr_ids.get(a.strip())
            if a_id is None:
                continue
            if a_id in seen and seen[a_id] != v:
                conflicted.add(a_id)
            seen[a_id] = v
        truth = np.full(dataset.n_attributes, -1, dtype=np.int64)
        # a true value nobody claimed has no fact; mark with an id that never matches
        unclaimed = len(dataset.value_names)
        for a_id, v in seen.items():
            if a_id not in conflicted:
                truth[a_id] = value_ids.get(v, unclaimed)
        return dataset.with_truth(attr_truth=truth)
    fact_ids = {n: i for i, n in enumerate(dataset.fact_names)}
    truth = np.full(dataset.n_facts, -1, dtype=np.int8)
    for lineno, (f, t, *_) in _read_rows(path, ("fact", "truth")):
        t = t.strip()
        if t not in ("0", "1"):
            raise InputError(f"truth must be 0 or 1, got {t!r}", lineno)
        f_id = fact_ids.get(f.strip())
        if f_id is not None:
            truth[f_id] = int(t)
    return dataset.with_truth(fact_truth=truth)


def write_claims_csv(path, dataset: Dataset) -> None:
    """Write the categorical (positive) claims, or binary claims for binary datasets."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if dataset.is_categorical:
            w.writerow(["source", "attribute", "value"])
            for s, a, v in dataset.positive_claims():
                w.writerow([dataset.source_names[s], dataset.attribute_names[a],
                            dataset.value_names[v]])
        else:
            w.writerow(["source", "fact", "polarity"])
            for s, f, v in dataset.claims():
                w.writerow([dataset.source_names[s], dataset.fact_names[f], v])


def write_truth_csv(path, dataset: Dataset) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if dataset.is_categorical:
            w.writerow(["attribute", "value"])
            for a, v in enumerate(dataset.attr_truth.tolist()):
                if 0 <= v < len(dataset.value_names):
                    w.writerow([dataset.attribute_names[a], dataset.value_names[v]])
        else:
            w.writerow(["fact", "truth"])
            for f, t in enumerate(dataset.fact_truth.tolist()):
                if t >= 0:
                    w.writerow([dataset.fact_names[f], t])
