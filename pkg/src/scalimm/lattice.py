"""Verdict lattice, analysis cells and the worklist fixpoint engine.

Verdicts form a four-point total order under "less immutable than".  The
engine starts every template at the top (deep immutable), repeatedly
applies a caller-supplied transfer function and lowers cells with the
meet, so cell values only ever move down and termination is a counting
argument: each cell can strictly drop at most three times.

``exhaustive_fixpoint_oracle`` computes the same answer by brute force,
enumerating every assignment and taking the greatest one the transfer
function leaves fixed.  It shares no code with the engine loop and exists
to check it.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from enum import IntEnum
from typing import TYPE_CHECKING, Callable, Mapping, NamedTuple

import numpy as np

from .ir import TemplateGraph, iter_type_refs, template_dependencies

if TYPE_CHECKING:
    from .classify import AttributeKey, EvidenceRecord

__all__ = [
    "Cell",
    "FixpointResult",
    "TransferFn",
    "TransferResult",
    "VERDICT_BY_TOKEN",
    "VERDICT_TOKENS",
    "Verdict",
    "exhaustive_fixpoint_oracle",
    "meet",
    "run_fixpoint",
]


class Verdict(IntEnum):
    """Immutability verdicts, ordered from least to most immutable.

    The integer order is the lattice order: a smaller value means the
    template is known to be less immutable.  Comparisons and ``min`` are
    therefore meaningful and used throughout.
    """

    MUTABLE = 0
    SHALLOW_IMMUTABLE = 1
    CONDITIONALLY_DEEP = 2
    DEEP_IMMUTABLE = 3


#: Stable spelling of each verdict, used in assumption files and JSON output.
VERDICT_TOKENS: dict[Verdict, str] = {
    Verdict.MUTABLE: "mutable",
    Verdict.SHALLOW_IMMUTABLE: "shallow",
    Verdict.CONDITIONALLY_DEEP: "conditionally_deep",
    Verdict.DEEP_IMMUTABLE: "deep",
}

VERDICT_BY_TOKEN: dict[str, Verdict] = {tok: v for v, tok in VERDICT_TOKENS.items()}


def meet(a: Verdict, b: Verdict) -> Verdict:
    """Greatest lower bound of two verdicts: the less immutable one."""
    return a if a <= b else b


class TransferResult(NamedTuple):
    """One evaluation of the transfer function for one template."""

    verdict: Verdict
    attributes: frozenset[AttributeKey]
    evidence: tuple[EvidenceRecord, ...]


#: Transfer functions compute a template's verdict from the current
#: assignment of verdicts to all templates.  They must be monotone in the
#: assignment and may read it only at names defined in the graph.
TransferFn = Callable[[TemplateGraph, str, Mapping[str, "Verdict"]], TransferResult]


@dataclass
class Cell:
    """Mutable analysis state for one template.

    A cell starts at deep immutable with no attributes and is only ever
    lowered.  ``history`` records each value the cell has held, so tests
    can audit that the sequence is strictly decreasing.
    """

    value: Verdict = Verdict.DEEP_IMMUTABLE
    attributes: frozenset = frozenset()
    history: list[Verdict] = field(default_factory=lambda: [Verdict.DEEP_IMMUTABLE])

    def downgrade(self, verdict: Verdict, attributes: frozenset) -> bool:
        """Lower the cell by meet and union in new attributes.

        Returns True when the cell changed: the value strictly decreased
        or the attribute set grew.  Re-deriving evidence already recorded
        does not count as change.
        """
        new_value = meet(self.value, verdict)
        changed = False
        if new_value < self.value:
            self.value = new_value
            self.history.append(new_value)
            changed = True
        if not attributes <= self.attributes:
            self.attributes = self.attributes | attributes
            changed = True
        return changed

    @property
    def strict_downgrades(self) -> int:
        """How many times the value strictly decreased."""
        return len(self.history) - 1


@dataclass(frozen=True)
class FixpointResult:
    """Outcome of a fixpoint run.

    ``attributes`` and ``evidence`` come from re-evaluating the transfer
    function once at the final assignment, so they depend only on the
    fixpoint reached, not on the order cells were processed.  ``history``
    and ``strict_downgrades`` expose the per-cell trajectory for audits;
    ``recomputations`` counts transfer evaluations in the main loop.
    """

    verdicts: dict[str, Verdict]
    attributes: dict[str, frozenset]
    evidence: dict[str, tuple]
    history: dict[str, tuple[Verdict, ...]]
    strict_downgrades: dict[str, int]
    recomputations: int


def run_fixpoint(
    graph: TemplateGraph,
    transfer: TransferFn,
    *,
    rng: random.Random | None = None,
) -> FixpointResult:
    """Run the worklist algorithm to the greatest fixpoint of ``transfer``.

    Every template is seeded on the worklist.  When a cell changes, the
    templates whose transfer can read it are re-queued.  By default items
    leave the list first-in first-out; passing ``rng`` picks the next item
    uniformly at random instead, which perturbs evaluation order without
    affecting the result and is how order-independence gets exercised.

    After the list drains, the transfer function is evaluated once more
    per template at the final assignment.  A verdict that disagrees with
    the settled cell means the transfer function is not monotone, which is
    a contract violation and raises RuntimeError.
    """
    names = list(graph.templates)
    cells: dict[str, Cell] = {name: Cell() for name in names}

    dependents: dict[str, set[str]] = {name: set() for name in names}
    for name in names:
        for dep in template_dependencies(graph, graph.templates[name]):
            dependents[dep].add(name)

    worklist: list[str] = list(names)
    queued: set[str] = set(worklist)
    recomputations = 0

    while worklist:
        index = rng.randrange(len(worklist)) if rng is not None else 0
        name = worklist.pop(index)
        queued.discard(name)

        assignment = {n: c.value for n, c in cells.items()}
        result = transfer(graph, name, assignment)
        recomputations += 1

        if cells[name].downgrade(result.verdict, result.attributes):
            for dep in dependents[name]:
                if dep not in queued:
                    worklist.append(dep)
                    queued.add(dep)

    final = {n: c.value for n, c in cells.items()}
    attributes: dict[str, frozenset] = {}
    evidence: dict[str, tuple] = {}
    for name in names:
        result = transfer(graph, name, final)
        if result.verdict != final[name]:
            raise RuntimeError(
                f"transfer is not monotone: template {name!r} settled at "
                f"{final[name].name} but reevaluates to {result.verdict.name} "
                "at the fixpoint"
            )
        attributes[name] = result.attributes
        evidence[name] = result.evidence

    return FixpointResult(
        verdicts=final,
        attributes=attributes,
        evidence=evidence,
        history={n: tuple(c.history) for n, c in cells.items()},
        strict_downgrades={n: c.strict_downgrades for n, c in cells.items()},
        recomputations=recomputations,
    )


# ---- brute-force oracle ---------------------------------------------------

#: Enumerating assignments is 4**n rows; beyond this many templates the
#: table no longer fits in reasonable memory or time.
ORACLE_TEMPLATE_LIMIT = 10

_digit_matrix_cache: dict[int, np.ndarray] = {}


def _digit_matrix(n: int) -> np.ndarray:
    """All base-4 words of length n as a (4**n, n) uint8 matrix, most
    significant digit first."""
    cached = _digit_matrix_cache.get(n)
    if cached is None:
        rows = np.arange(4**n, dtype=np.int64)[:, None]
        shifts = 2 * np.arange(n - 1, -1, -1, dtype=np.int64)
        cached = ((rows >> shifts) & 3).astype(np.uint8)
        _digit_matrix_cache[n] = cached
    return cached


def _mentioned_templates(graph: TemplateGraph, name: str) -> list[str]:
    """Graph templates mentioned anywhere in a template's parents or field
    types, shadowed or not.

    This deliberately over-approximates the engine's dependency relation
    and ignores scope, so the oracle stays independent of that logic: a
    mentioned name the transfer never reads just adds a constant axis to
    its table.
    """
    template = graph.templates[name]
    mentioned: set[str] = set()

    def walk(ref) -> None:
        if ref.head in graph.templates:
            mentioned.add(ref.head)
        for a in ref.args:
            walk(a)

    for ref in iter_type_refs(template):
        walk(ref)
    return sorted(mentioned)


def exhaustive_fixpoint_oracle(
    graph: TemplateGraph,
    transfer: TransferFn,
) -> dict[str, Verdict]:
    """Greatest fixpoint of ``transfer`` by enumerating every assignment.

    Tabulates each template's transfer over all combinations of the
    verdicts it can mention, filters the full assignment space down to
    exact fixpoints with vectorized table lookups, and returns the
    pointwise maximum.  That maximum must itself be a fixpoint; if it is
    not, or no fixpoint exists, the transfer function is not monotone and
    RuntimeError is raised.

    Only graphs with at most ORACLE_TEMPLATE_LIMIT templates are accepted.
    """
    names = list(graph.templates)
    n = len(names)
    if n > ORACLE_TEMPLATE_LIMIT:
        raise ValueError(
            f"oracle enumerates 4**n assignments; {n} templates exceeds the "
            f"limit of {ORACLE_TEMPLATE_LIMIT}"
        )
    if n == 0:
        return {}

    column = {name: i for i, name in enumerate(names)}
    matrix = _digit_matrix(n)
    mask = np.ones(len(matrix), dtype=bool)

    for i, name in enumerate(names):
        deps = _mentioned_templates(graph, name)
        k = len(deps)
        table = np.empty(4**k, dtype=np.uint8)
        for combo in itertools.product(range(4), repeat=k):
            assignment = {d: Verdict(v) for d, v in zip(deps, combo)}
            flat = 0
            for v in combo:
                flat = flat * 4 + v
            table[flat] = int(transfer(graph, name, assignment).verdict)

        if k:
            cols = [column[d] for d in deps]
            weights = 4 ** np.arange(k - 1, -1, -1, dtype=np.int64)
            flat_all = matrix[:, cols].astype(np.int64) @ weights
            mask &= table[flat_all] == matrix[:, i]
        else:
            mask &= table[0] == matrix[:, i]

    fixed = matrix[mask]
    if len(fixed) == 0:
        raise RuntimeError("no fixpoint exists; transfer is not monotone")
    best = fixed.max(axis=0)
    if not (fixed == best).all(axis=1).any():
        raise RuntimeError(
            "pointwise maximum of fixpoints is not a fixpoint; transfer is "
            "not monotone"
        )
    return {name: Verdict(int(best[i])) for i, name in enumerate(names)}
