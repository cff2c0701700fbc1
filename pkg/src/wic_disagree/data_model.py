"""Word-in-Context instances with ordinal annotator ratings and derived targets.

A corpus consists of two TSV files:

* ``usages.tsv``: ``usage_id, lemma, language, target_start, target_end, context``
* ``instances.tsv``: ``instance_id, lemma, language, usage_1, usage_2, ratings``

where ``ratings`` is a comma-joined list of integers in {1,2,3,4} and contexts
are stored on one line with tabs/newlines escaped (see :func:`escape_context`).

From the ratings two targets are derived per instance: the median judgment
(ordinal classification target, defined only when the conventional median is
integral) and the mean pairwise disagreement (regression/ranking target,
defined only when at least two ratings exist).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .errors import DataError

VALID_RATINGS = (1, 2, 3, 4)

USAGES_HEADER = ["usage_id", "lemma", "language", "target_start", "target_end", "context"]
INSTANCES_HEADER = ["instance_id", "lemma", "language", "usage_1", "usage_2", "ratings"]


def escape_context(text: str) -> str:
    """One-line encoding of a context: backslash, tab, newline, CR escaped."""
    return (
        text.replace("\\", "\\\\")
        .replace("\t", "\\t")
        .replace("\n", "\\n")
        .replace("\r", "\\r")
    )


def unescape_context(text: str) -> str:
    """Inverse of :func:`escape_context`."""
    out = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\\" and i + 1 < n:
            nxt = text[i + 1]
            if nxt == "\\":
                out.append("\\")
            elif nxt == "t":
                out.append("\t")
            elif nxt == "n":
                out.append("\n")
            elif nxt == "r":
                out.append("\r")
            else:
                out.append(ch)
                out.append(nxt)
            i += 2
            continue
        out.append(ch)
        i += 1
    return "".join(out)


@dataclass(frozen=True)
class Usage:
    """One occurrence of a lemma in a context, with character-level target span."""

    usage_id: str
    context: str
    lemma: str
    target_start: int
    target_end: int
    language: str

    def __post_init__(self) -> None:
        if not (0 <= self.target_start < self.target_end <= len(self.context)):
            raise DataError(
                f"usage {self.usage_id!r}: target span [{self.target_start}, "
                f"{self.target_end}) invalid for context of length {len(self.context)}"
            )

    @property
    def target_text(self) -> str:
        return self.context[self.target_start : self.target_end]


@dataclass(frozen=True)
class Instance:
    """A pair of usages of the same lemma plus the annotators' ordinal ratings."""

    instance_id: str
    usage_1: str
    usage_2: str
    lemma: str
    language: str
    ratings: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.ratings) < 1:
            raise DataError(f"instance {self.instance_id!r}: empty ratings list")
        for r in self.ratings:
            if r not in VALID_RATINGS:
                raise DataError(
                    f"instance {self.instance_id!r}: rating {r!r} outside {{1,2,3,4}}"
                )


@dataclass(frozen=True)
class TaskTargets:
    """Derived prediction targets for one instance.

    ``median_label`` is absent when the conventional median of the ratings is
    not an integer (the instance then has no ordinal classification target).
    ``mean_disagreement`` is absent when fewer than two ratings exist.
    """

    median_label: Optional[int]
    mean_disagreement: Optional[float]


def median_label(ratings: Iterable[int], instance_id: str | None = None) -> Optional[int]:
    """Median of the ratings if it is integral, else ``None``.

    For an even number of ratings the conventional median (mean of the two
    middle values) is used; a half-integer median means the instance has no
    meaningful ordinal label and is excluded from the classification task.
    """
    rs = _checked_ratings(ratings, instance_id)
    rs.sort()
    n = len(rs)
    if n % 2 == 1:
        return rs[n // 2]
    lo, hi = rs[n // 2 - 1], rs[n // 2]
    if (lo + hi) % 2 == 0:
        return (lo + hi) // 2
    return None


def mean_pairwise_disagreement(ratings: Iterable[int], instance_id: str | None = None) -> float:
    """Mean absolute rating difference over all unordered annotator pairs."""
    rs = _checked_ratings(ratings, instance_id)
    n = len(rs)
    if n < 2:
        who = f" (instance {instance_id!r})" if instance_id else ""
        raise DataError(f"mean disagreement undefined for fewer than 2 ratings{who}")
    total = sum(abs(a - b) for a, b in itertools.combinations(rs, 2))
    return total / (n * (n - 1) / 2)


def _checked_ratings(ratings: Iterable[int], instance_id: str | None) -> list[int]:
    rs = list(ratings)
    if not rs:
        raise DataError("empty ratings list")
    for r in rs:
        if r not in VALID_RATINGS:
            who = f"instance {instance_id!r}: " if instance_id else ""
            raise DataError(f"{who}rating {r!r} outside {{1,2,3,4}}")
    return rs


def targets_for(instance: Instance) -> TaskTargets:
    """Both derived targets for one instance (either may be absent)."""
    med = median_label(instance.ratings, instance.instance_id)
    dis = (
        mean_pairwise_disagreement(instance.ratings, instance.instance_id)
        if len(instance.ratings) >= 2
        else None
    )
    return TaskTargets(median_label=med, mean_disagreement=dis)


@dataclass
class Dataset:
    """Loaded corpus: usages, instances, derived targets, and exclusion counts.

    Immutable after load by convention; nothing mutates it, so concurrent
    reads are safe.
    """

    usages: dict[str, Usage]
    instances: list[Instance]
    targets: dict[str, TaskTargets]
    excluded_no_median: int = 0
    excluded_single_rating: int = 0

    def ogwic_instances(self) -> list[Instance]:
        """Instances with a defined median label, in load order."""
        return [i for i in self.instances if self.targets[i.instance_id].median_label is not None]

    def diswic_instances(self) -> list[Instance]:
        """Instances with a defined mean disagreement, in load order."""
        return [
            i for i in self.instances if self.targets[i.instance_id].mean_disagreement is not None
        ]

    def instances_for_task(self, task: str) -> list[Instance]:
        if task == "ogwic":
            return self.ogwic_instances()
        if task == "diswic":
            return self.diswic_instances()
        raise DataError(f"unknown task {task!r} (expected 'ogwic' or 'diswic')")

    def languages(self) -> list[str]:
        return sorted({u.language for u in self.usages.values()})


def _parse_tsv(path: str | Path, header: list[str]) -> Iterable[tuple[int, list[str]]]:
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise DataError(f"{path}: empty file (expected header row)")
    got = lines[0].split("\t")
    if got != header:
        raise DataError(f"{path}: bad header {got!r}, expected {header!r}")
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != len(header):
            raise DataError(
                f"{path}:{lineno}: expected {len(header)} fields, got {len(fields)}"
            )
        yield lineno, fields


def load_usages(path: str | Path) -> dict[str, Usage]:
    """Parse ``usages.tsv`` into a map keyed by usage_id."""
    usages: dict[str, Usage] = {}
    for lineno, fields in _parse_tsv(path, USAGES_HEADER):
        usage_id, lemma, language, start_s, end_s, raw_context = fields
        try:
            start, end = int(start_s), int(end_s)
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: non-integer target offsets") from exc
        if usage_id in usages:
            raise DataError(f"{path}:{lineno}: duplicate usage_id {usage_id!r}")
        usages[usage_id] = Usage(
            usage_id=usage_id,
            context=unescape_context(raw_context),
            lemma=lemma,
            target_start=start,
            target_end=end,
            language=language,
        )
    return usages


def load_instances(path: str | Path) -> list[Instance]:
    """Parse ``instances.tsv`` in file order."""
    instances: list[Instance] = []
    seen: set[str] = set()
    for lineno, fields in _parse_tsv(path, INSTANCES_HEADER):
        instance_id, lemma, language, usage_1, usage_2, ratings_s = fields
        if instance_id in seen:
            raise DataError(f"{path}:{lineno}: duplicate instance_id {instance_id!r}")
        seen.add(instance_id)
        try:
            ratings = tuple(int(r) for r in ratings_s.split(",") if r != "")
        except ValueError as exc:
            raise DataError(
                f"{path}:{lineno}: unparseable ratings {ratings_s!r}"
            ) from exc
        instances.append(
            Instance(
                instance_id=instance_id,
                usage_1=usage_1,
                usage_2=usage_2,
                lemma=lemma,
                language=language,
                ratings=ratings,
            )
        )
    return instances


def load_dataset(usages_path: str | Path, instances_path: str | Path) -> Dataset:
    """Load a corpus, derive targets, and count per-task exclusions.

    Raises :class:`DataError` on malformed rows (with line numbers), dangling
    usage references, lemma mismatches, or invalid ratings.
    """
    usages = load_usages(usages_path)
    instances = load_instances(instances_path)
    targets: dict[str, TaskTargets] = {}
    no_median = 0
    single_rating = 0
    for inst in instances:
        for uid in (inst.usage_1, inst.usage_2):
            if uid not in usages:
                raise DataError(
                    f"instance {inst.instance_id!r} references unknown usage {uid!r}"
                )
            if usages[uid].lemma != inst.lemma:
                raise DataError(
                    f"instance {inst.instance_id!r}: lemma {inst.lemma!r} does not "
                    f"match usage {uid!r} lemma {usages[uid].lemma!r}"
                )
        t = targets_for(inst)
        targets[inst.instance_id] = t
        if t.median_label is None:
            no_median += 1
        if t.mean_disagreement is None:
            single_rating += 1
    return Dataset(
        usages=usages,
        instances=instances,
        targets=targets,
        excluded_no_median=no_median,
        excluded_single_rating=single_rating,
    )


def write_usages_tsv(usages: Iterable[Usage], path: str | Path) -> None:
    lines = ["\t".join(USAGES_HEADER)]
    for u in usages:
        lines.append(
            "\t".join(
                [
                    u.usage_id,
                    u.lemma,
                    u.language,
                    str(u.target_start),
                    str(u.target_end),
                    escape_context(u.context),
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_instances_tsv(instances: Iterable[Instance], path: str | Path) -> None:
    lines = ["\t".join(INSTANCES_HEADER)]
    for i in instances:
        lines.append(
            "\t".join(
                [
                    i.instance_id,
                    i.lemma,
                    i.language,
                    i.usage_1,
                    i.usage_2,
                    ",".join(str(r) for r in i.ratings),
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class StatsRow:
    """One row of the corpus statistics table."""

    language: str
    unique_contexts: int
    unique_lemmas: int
    mean_context_words: int
    ogwic_instances: int
    diswic_instances: int


@dataclass
class StatsTable:
    """Per-language corpus statistics plus an AVG row (mean over languages)."""

    rows: list[StatsRow] = field(default_factory=list)
    average: Optional[StatsRow] = None

    COLUMNS = [
        "language",
        "unique_contexts",
        "unique_lemmas",
        "mean_context_words",
        "ogwic_instances",
        "diswic_instances",
    ]

    def all_rows(self) -> list[StatsRow]:
        out = [self.average] if self.average is not None else []
        return out + self.rows

    def to_tsv(self) -> str:
        lines = ["\t".join(self.COLUMNS)]
        for r in self.all_rows():
            lines.append(
                "\t".join(
                    [
                        r.language,
                        str(r.unique_contexts),
                        str(r.unique_lemmas),
                        str(r.mean_context_words),
                        str(r.ogwic_instances),
                        str(r.diswic_instances),
                    ]
                )
            )
        return "\n".join(lines) + "\n"


def _round_half_up(x: float) -> int:
    return int(x + 0.5) if x >= 0 else -int(-x + 0.5)


def dataset_stats(dataset: Dataset) -> StatsTable:
    """Per-language statistics and the cross-language average.

    Unique contexts are counted as distinct context strings per language;
    context length is the whitespace-token count, averaged over those
    distinct contexts and rounded to the nearest integer.
    """
    langs = dataset.languages()
    ogwic = dataset.ogwic_instances()
    diswic = dataset.diswic_instances()
    rows: list[StatsRow] = []
    for lang in langs:
        contexts = {u.context for u in dataset.usages.values() if u.language == lang}
        lemmas = {u.lemma for u in dataset.usages.values() if u.language == lang}
        mean_words = (
            sum(len(c.split()) for c in contexts) / len(contexts) if contexts else 0.0
        )
        rows.append(
            StatsRow(
                language=lang,
                unique_contexts=len(contexts),
                unique_lemmas=len(lemmas),
                mean_context_words=_round_half_up(mean_words),
                ogwic_instances=sum(1 for i in ogwic if i.language == lang),
                diswic_instances=sum(1 for i in diswic if i.language == lang),
            )
        )
    table = StatsTable(rows=rows)
    if rows:
        k = len(rows)
        table.average = StatsRow(
            language="AVG",
            unique_contexts=_round_half_up(sum(r.unique_contexts for r in rows) / k),
            unique_lemmas=_round_half_up(sum(r.unique_lemmas for r in rows) / k),
            mean_context_words=_round_half_up(sum(r.mean_context_words for r in rows) / k),
            ogwic_instances=_round_half_up(sum(r.ogwic_instances for r in rows) / k),
            diswic_instances=_round_half_up(sum(r.diswic_instances for r in rows) / k),
        )
    return table
