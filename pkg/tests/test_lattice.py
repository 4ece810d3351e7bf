"""Lattice, cell and fixpoint engine behavior, checked against oracles."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphgen import make_graph, naive_fixpoint_oracle
from scalimm.classify import AttributeKey, make_transfer
from scalimm.ir import FieldDecl, TemplateDef, TemplateKind, TypeRef, Visibility, build_graph
from scalimm.lattice import (
    Cell,
    TransferResult,
    VERDICT_BY_TOKEN,
    VERDICT_TOKENS,
    Verdict,
    exhaustive_fixpoint_oracle,
    meet,
    run_fixpoint,
)

verdicts = st.sampled_from(list(Verdict))


def mk_class(name, *, kind=TemplateKind.CLASS, parents=(), fields=()):
    return TemplateDef(
        name=name,
        kind=kind,
        parents=tuple(TypeRef(p) if isinstance(p, str) else p for p in parents),
        fields=tuple(fields),
    )


def mk_field(name, type_head, *, var=False, private=False):
    return FieldDecl(
        name=name,
        reassignable=var,
        visibility=Visibility.PRIVATE if private else Visibility.PUBLIC,
        declared_type=TypeRef(type_head) if isinstance(type_head, str) else type_head,
    )


# ---- order and meet -------------------------------------------------------


def test_verdict_order_is_mutable_to_deep():
    assert (
        Verdict.MUTABLE
        < Verdict.SHALLOW_IMMUTABLE
        < Verdict.CONDITIONALLY_DEEP
        < Verdict.DEEP_IMMUTABLE
    )


def test_verdict_tokens_are_a_bijection():
    assert len(VERDICT_TOKENS) == 4
    assert VERDICT_BY_TOKEN == {t: v for v, t in VERDICT_TOKENS.items()}
    assert VERDICT_BY_TOKEN["conditionally_deep"] is Verdict.CONDITIONALLY_DEEP


@given(verdicts, verdicts)
def test_meet_commutative(a, b):
    assert meet(a, b) == meet(b, a)


@given(verdicts, verdicts, verdicts)
def test_meet_associative(a, b, c):
    assert meet(a, meet(b, c)) == meet(meet(a, b), c)


@given(verdicts)
def test_meet_idempotent_with_top_identity(a):
    assert meet(a, a) == a
    assert meet(a, Verdict.DEEP_IMMUTABLE) == a
    assert meet(a, Verdict.MUTABLE) == Verdict.MUTABLE


@given(verdicts, verdicts)
def test_meet_is_lower_bound(a, b):
    m = meet(a, b)
    assert m <= a and m <= b


# ---- cells ----------------------------------------------------------------


def test_cell_starts_at_top_with_no_attributes():
    cell = Cell()
    assert cell.value is Verdict.DEEP_IMMUTABLE
    assert cell.attributes == frozenset()
    assert cell.history == [Verdict.DEEP_IMMUTABLE]
    assert cell.strict_downgrades == 0


def test_cell_downgrade_reports_value_and_attribute_changes():
    cell = Cell()
    a = frozenset({AttributeKey.PUBLIC_VAR})
    assert cell.downgrade(Verdict.SHALLOW_IMMUTABLE, a) is True
    assert cell.value is Verdict.SHALLOW_IMMUTABLE
    assert cell.attributes == a

    # Same evidence again: nothing new.
    assert cell.downgrade(Verdict.SHALLOW_IMMUTABLE, a) is False

    # Attribute growth alone still counts as a change but not a downgrade.
    b = frozenset({AttributeKey.PARENT_SHALLOW})
    assert cell.downgrade(Verdict.SHALLOW_IMMUTABLE, b) is True
    assert cell.attributes == a | b
    assert cell.strict_downgrades == 1

    # A higher verdict never raises the value.
    assert cell.downgrade(Verdict.DEEP_IMMUTABLE, frozenset()) is False
    assert cell.value is Verdict.SHALLOW_IMMUTABLE


def test_cell_history_caps_at_three_strict_downgrades():
    cell = Cell()
    for v in (
        Verdict.CONDITIONALLY_DEEP,
        Verdict.SHALLOW_IMMUTABLE,
        Verdict.MUTABLE,
        Verdict.MUTABLE,
    ):
        cell.downgrade(v, frozenset())
    assert cell.strict_downgrades == 3
    assert cell.history == [
        Verdict.DEEP_IMMUTABLE,
        Verdict.CONDITIONALLY_DEEP,
        Verdict.SHALLOW_IMMUTABLE,
        Verdict.MUTABLE,
    ]


# ---- engine on small hand-built graphs ------------------------------------


def test_parent_of_mutable_class_is_mutable():
    graph = build_graph(
        [
            mk_class("C", fields=[mk_field("n", "ext.Int", var=True)]),
            mk_class("D", parents=["C"]),
        ]
    )
    result = run_fixpoint(graph, make_transfer())
    assert result.verdicts == {"C": Verdict.MUTABLE, "D": Verdict.MUTABLE}
    assert result.attributes["C"] == {AttributeKey.PUBLIC_VAR}
    assert result.attributes["D"] == {AttributeKey.PARENT_MUTABLE}


def test_val_cycle_settles_deep():
    graph = build_graph(
        [
            mk_class("A", fields=[mk_field("b", "B")]),
            mk_class("B", fields=[mk_field("a", "A")]),
        ]
    )
    result = run_fixpoint(graph, make_transfer())
    assert result.verdicts == {
        "A": Verdict.DEEP_IMMUTABLE,
        "B": Verdict.DEEP_IMMUTABLE,
    }
    assert result.attributes["A"] == frozenset()
    assert result.attributes["B"] == frozenset()


def test_mutability_propagates_down_a_parent_chain():
    graph = build_graph(
        [
            mk_class("X", fields=[mk_field("n", "ext.Int", var=True, private=True)]),
            mk_class("Y", parents=["X"]),
            mk_class("Z", parents=["Y"]),
        ]
    )
    result = run_fixpoint(graph, make_transfer())
    assert set(result.verdicts.values()) == {Verdict.MUTABLE}
    assert result.attributes["X"] == {AttributeKey.PRIVATE_VAR}
    assert result.attributes["Y"] == {AttributeKey.PARENT_MUTABLE}
    assert result.attributes["Z"] == {AttributeKey.PARENT_MUTABLE}


def test_empty_graph_runs_to_empty_result():
    graph = build_graph([])
    result = run_fixpoint(graph, make_transfer())
    assert result.verdicts == {}
    assert result.recomputations == 0
    assert exhaustive_fixpoint_oracle(graph, make_transfer()) == {}


def test_run_fixpoint_instrumentation_bounds():
    rng = random.Random(4821)
    for _ in range(50):
        graph, assumptions = make_graph(rng)
        result = run_fixpoint(graph, make_transfer(assumptions))
        n = len(graph.templates)
        assert result.recomputations >= n
        assert sum(result.strict_downgrades.values()) <= 3 * n
        for history in result.history.values():
            assert history[0] is Verdict.DEEP_IMMUTABLE
            assert all(a > b for a, b in zip(history, history[1:]))


def test_random_pop_order_gives_identical_results():
    rng = random.Random(93)
    for _ in range(25):
        graph, assumptions = make_graph(rng)
        transfer = make_transfer(assumptions)
        baseline = run_fixpoint(graph, transfer)
        for seed in range(4):
            shuffled = run_fixpoint(
                graph, transfer, rng=random.Random(seed)
            )
            assert shuffled.verdicts == baseline.verdicts
            assert shuffled.attributes == baseline.attributes
            assert shuffled.evidence == baseline.evidence


# ---- non-monotone transfer detection --------------------------------------


def _flipping_transfer(graph, name, assignment):
    value = (
        Verdict.MUTABLE
        if assignment[name] is Verdict.DEEP_IMMUTABLE
        else Verdict.DEEP_IMMUTABLE
    )
    attrs = (
        frozenset({AttributeKey.PUBLIC_VAR})
        if value is Verdict.MUTABLE
        else frozenset()
    )
    return TransferResult(value, attrs, ())


def test_final_sweep_rejects_non_monotone_transfer():
    graph = build_graph([mk_class("A", fields=[mk_field("self", "A")])])
    with pytest.raises(RuntimeError, match="not monotone"):
        run_fixpoint(graph, _flipping_transfer)


def test_oracle_rejects_transfer_without_fixpoint():
    graph = build_graph([mk_class("A", fields=[mk_field("self", "A")])])
    with pytest.raises(RuntimeError):
        exhaustive_fixpoint_oracle(graph, _flipping_transfer)


def test_oracle_refuses_oversized_graphs():
    graph = build_graph([mk_class(f"T{i}") for i in range(11)])
    with pytest.raises(ValueError, match="limit"):
        exhaustive_fixpoint_oracle(graph, make_transfer())


# ---- oracle cross-checks --------------------------------------------------


def test_vectorized_oracle_matches_naive_oracle_on_tiny_graphs():
    rng = random.Random(777)
    checked = 0
    while checked < 200:
        graph, assumptions = make_graph(rng, max_templates=3)
        transfer = make_transfer(assumptions)
        fast = exhaustive_fixpoint_oracle(graph, transfer)
        slow = naive_fixpoint_oracle(graph, transfer)
        assert fast == slow
        checked += 1


def test_engine_matches_oracle_on_random_graphs():
    rng = random.Random(31337)
    for _ in range(100):
        graph, assumptions = make_graph(rng)
        transfer = make_transfer(assumptions)
        engine = run_fixpoint(graph, transfer).verdicts
        oracle = exhaustive_fixpoint_oracle(graph, transfer)
        assert engine == oracle


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_engine_matches_oracle_property(seed):
    rng = random.Random(seed)
    graph, assumptions = make_graph(rng, max_templates=5)
    transfer = make_transfer(assumptions)
    assert run_fixpoint(graph, transfer).verdicts == exhaustive_fixpoint_oracle(
        graph, transfer
    )
