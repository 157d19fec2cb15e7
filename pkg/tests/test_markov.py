import itertools
import random
from fractions import Fraction

import networkx as nx

from conftest import single_map_model
from oracles import random_model
from rds_sync.boolnet import p53
from rds_sync.core import MapTable, NoiseModel, StateSpace
from rds_sync.markov import (class_decomposition, induced_chain, is_synchronizing, max_clique, pair_status,
                             strongly_connected_components, sync_bounds, two_point_chain)

FOUR_STATE_CLASS = {(1, 3), (3, 1), (2, 4), (4, 2), (2, 3), (3, 2), (4, 1), (1, 4)}


def _as_labels(cls):
    return {(a + 1, b + 1) for a, b in cls}


def _perm_model(k=5):
    space = StateSpace.range(k)
    cyc = MapTable(space, [(i + 1) % k for i in range(k)])
    swap = MapTable(space, [1, 0] + list(range(2, k)))
    return NoiseModel((cyc, swap), (Fraction(1, 2), Fraction(1, 2)))


def test_induced_chain_examples(four_state, p53_model):
    ident = induced_chain(single_map_model([0, 1, 2]))
    assert all(ident.p(i, j) == (1 if i == j else 0) for i in range(3) for j in range(3))
    chain = induced_chain(four_state)
    assert chain.p(0, 1) == Fraction(1, 5)
    row = induced_chain(p53_model).transitions[p53.REST_STATE]
    c6 = int(p53_model.alphabet[0].image[p53.REST_STATE])
    assert row == {c6: p53.DEFAULT_P, 6: 1 - p53.DEFAULT_P}


def test_two_point_examples(four_state):
    ident = two_point_chain(single_map_model([0, 1, 2]))
    assert all(ident.transitions[pair] == {pair: 1} for pair in ident.nodes)
    chain = two_point_chain(four_state)
    assert chain.w((0, 2), (1, 3)) == Fraction(1, 5)
    assert len(chain.nodes) == 16


def test_diagonal_closure_and_row_sums():
    rng = random.Random(21)
    for _ in range(100):
        model = random_model(rng)
        chain = two_point_chain(model)
        for pair, row in chain.transitions.items():
            assert sum(row.values()) == 1
            if pair[0] == pair[1]:
                assert all(a == b for a, b in row)
        for row in induced_chain(model).transitions:
            assert sum(row.values()) == 1


def test_diagonal_restriction_equals_induced_chain():
    rng = random.Random(22)
    for _ in range(50):
        model = random_model(rng)
        one, two = induced_chain(model), two_point_chain(model)
        for i in range(model.k):
            assert {j: q for (j, _), q in two.transitions[(i, i)].items()} == one.transitions[i]


def test_two_point_symmetry():
    rng = random.Random(23)
    for _ in range(50):
        model = random_model(rng)
        dec = class_decomposition(two_point_chain(model))
        rec = {p for c in dec.recurrent_classes for p in c if p[0] != p[1]}
        assert rec == {(b, a) for a, b in rec}


def test_class_decomposition_examples(four_state, p53_model):
    dec = class_decomposition(induced_chain(single_map_model([0, 1, 2, 3])))
    assert len(dec.classes) == 4 and all(dec.recurrent_flags)
    dec = class_decomposition(induced_chain(p53_model))
    rec = dec.recurrent_classes
    assert len(rec) == 2
    assert frozenset(p53.SHORT_CYCLE) in rec
    other = next(c for c in rec if 6 in c)
    assert other == frozenset(p53.LONG_CYCLE)
    dec = class_decomposition(two_point_chain(four_state))
    off = [c for c in dec.recurrent_classes if any(a != b for a, b in c)]
    assert len(off) == 1 and _as_labels(off[0]) == FOUR_STATE_CLASS


def test_scc_matches_networkx():
    rng = random.Random(24)
    for _ in range(100):
        n = rng.randint(1, 25)
        edges = {(rng.randrange(n), rng.randrange(n)) for _ in range(rng.randint(0, 3 * n))}
        succ = {v: [b for a, b in edges if a == v] for v in range(n)}
        ours = {frozenset(c) for c in strongly_connected_components(range(n), lambda v: succ[v])}
        g = nx.DiGraph()
        g.add_nodes_from(range(n))
        g.add_edges_from(edges)
        assert ours == {frozenset(c) for c in nx.strongly_connected_components(g)}


def test_max_clique_matches_networkx():
    rng = random.Random(25)
    for _ in range(100):
        n = rng.randint(1, 14)
        edges = [e for e in itertools.combinations(range(n), 2) if rng.random() < 0.5]
        clique, exact = max_clique(list(range(n)), edges)
        g = nx.Graph()
        g.add_nodes_from(range(n))
        g.add_edges_from(edges)
        assert exact
        assert all(g.has_edge(a, b) for a, b in itertools.combinations(clique, 2))
        assert len(clique) == max(len(c) for c in nx.find_cliques(g))


def test_bounds_permutation_model():
    for k in (2, 3, 5):
        b = sync_bounds(_perm_model(k))
        assert b.lower == b.upper == k
        assert not is_synchronizing(_perm_model(k))


def test_bounds_four_state(four_state):
    b = sync_bounds(four_state)
    assert b.lower == 2 and b.upper == 4
    assert {(x + 1, y + 1) for x, y in b.conflict_edges} == {(1, 3), (1, 4), (2, 3), (2, 4)}
    assert not is_synchronizing(four_state)


def test_bounds_p53(p53_model):
    b = sync_bounds(p53_model)
    assert b.lower == 5 and b.upper == 14
    clique = set(b.clique)
    assert len(clique & (set(p53.LONG_CYCLE) | {p53.REST_STATE})) == 1
    for block in p53.PHASE_BLOCKS:
        assert len(clique & set(block)) == 1
    assert not is_synchronizing(p53_model)


def test_constant_map_model_synchronizes():
    rng = random.Random(26)
    for _ in range(30):
        model = random_model(rng)
        const = MapTable.constant(model.space, rng.randrange(model.k))
        mixed = NoiseModel(model.alphabet + (const,), tuple(q / 2 for q in model.probs) + (Fraction(1, 2),))
        assert is_synchronizing(mixed)
        assert sync_bounds(mixed).lower == 1


def test_is_synchronizing_agrees_with_full_chain():
    rng = random.Random(27)
    for _ in range(100):
        model = random_model(rng)
        dec = class_decomposition(two_point_chain(model))
        full = all(a == b for c in dec.recurrent_classes for a, b in c)
        assert is_synchronizing(model) == full


def test_pair_status(four_state):
    b = sync_bounds(four_state)
    status = pair_status(b, [[0, 1], [2, 3]], 4)
    assert status[(0, 1)] == "Merged" and status[(0, 2)] == "Conflict"
    assert pair_status(b, [[0], [1], [2], [3]], 4)[(0, 1)] == "Undecided"
