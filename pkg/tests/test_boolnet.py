import itertools
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rds_sync.boolnet import (MAX_NODES, BinOp, BooleanNetwork, BoolNetSyntaxError, Const, Not, SizeCapExceeded,
                              Var, attractor_analysis, compile, format_expr, format_network, iterate_map,
                              parse_expr, parse_network)
from rds_sync.boolnet import p53
from rds_sync.core import MapTable, StateSpace, compose

NAMES = ("a", "b", "c")


def test_parse_single_negation():
    net = parse_network("node a; a' = NOT a;")
    assert net.nodes == ("a",) and net.rules == (Not(Var("a")),)


def test_parse_precedence():
    net = parse_network("node a; node b; a' = b; b' = a AND b;")
    assert net.rule("b") == BinOp("AND", Var("a"), Var("b"))
    assert parse_expr("a OR b AND NOT c") == BinOp("OR", Var("a"), BinOp("AND", Var("b"), Not(Var("c"))))
    assert parse_expr("a OR b XOR c") == BinOp("OR", Var("a"), BinOp("XOR", Var("b"), Var("c")))
    assert parse_expr("a XOR b AND c") == BinOp("XOR", Var("a"), BinOp("AND", Var("b"), Var("c")))
    assert parse_expr("(a OR b) AND c") == BinOp("AND", BinOp("OR", Var("a"), Var("b")), Var("c"))
    assert parse_expr("!a & b | 1") == parse_expr("not a and b or 1")
    assert parse_expr("0") == Const(False)


def test_parse_comments_and_case():
    text = "# toggle\nNODE a; node b;\na' = b; # copy\nb' = a;\n"
    assert parse_network(text).nodes == ("a", "b")


@pytest.mark.parametrize("text,line,column", [
    ("node a; a' = c;", 1, 14),
    ("node a;\na' = a;\na' = a;", 3, 1),
    ("node a; node b;\na' = b;", 1, 14),
    ("node a;\na' = (a;", 2, 8),
    ("node a; node a; a' = a;", 1, 14),
    ("node a; a' = a; b' = a;", 1, 17),
])
def test_parse_errors_carry_location(text, line, column):
    with pytest.raises(BoolNetSyntaxError) as info:
        parse_network(text)
    assert (info.value.line, info.value.column) == (line, column)


def test_undeclared_variable_message():
    with pytest.raises(BoolNetSyntaxError, match="c"):
        parse_network("node a; a' = c;")


def test_compile_examples():
    ident = compile(parse_network("node a; node b; node c; a' = a; b' = b; c' = c;"))
    assert ident.is_identity()
    assert compile(parse_network("node a; a' = NOT a;")).image.tolist() == [1, 0]
    toggle = compile(parse_network("node a; node b; a' = b; b' = a;"))
    assert toggle.image.tolist() == [0, 2, 1, 3]
    assert compose(toggle, toggle).is_identity()


def test_compile_bit_order():
    # node 0 is the least significant bit
    net = parse_network("node a; node b; a' = 1; b' = 0;")
    assert set(compile(net).image.tolist()) == {1}


def test_compile_matches_truth_table():
    net = parse_network("node a; node b; node c; a' = b XOR c; b' = a AND NOT c; c' = a OR b;")
    table = compile(net).image.tolist()
    for x in range(8):
        a, b, c = (x >> 0) & 1, (x >> 1) & 1, (x >> 2) & 1
        nxt = (b ^ c) | ((a & (1 - c)) << 1) | ((a | b) << 2)
        assert table[x] == nxt


def test_size_cap():
    n = MAX_NODES + 1
    names = [f"x{i}" for i in range(n)]
    net = BooleanNetwork(tuple(names), tuple(Var(v) for v in names))
    with pytest.raises(SizeCapExceeded):
        compile(net)


def test_iterate_map(p53_fixture):
    f = p53_fixture.stress
    assert iterate_map(f, 0).is_identity()
    assert iterate_map(f, 1) == f
    g = f
    for t in range(2, 25):
        g = compose(f, g)
        assert iterate_map(f, t) == g
    a10 = iterate_map(f, 10)
    assert all(a10(s) == s for s in p53.LONG_CYCLE)


def test_attractors_identity():
    att = attractor_analysis(MapTable.identity(StateSpace.range(5)))
    assert att.cycles == tuple((i,) for i in range(5))
    assert att.basins == tuple(frozenset({i}) for i in range(5))


def test_attractors_p53(p53_fixture):
    att = attractor_analysis(p53_fixture.stress)
    assert set(att.cycles) == {p53.LONG_CYCLE, p53.SHORT_CYCLE}
    assert len(att.basin_of_cycle_containing(1)) == 20
    assert len(att.basin_of_cycle_containing(0)) == 12
    batt = attractor_analysis(p53_fixture.rest)
    assert set(batt.cycles) == {(6,), p53.SHORT_CYCLE}
    assert batt.basin_of_cycle_containing(6) == att.basin_of_cycle_containing(1)


def test_attractor_basins_partition():
    import random
    rng = random.Random(31)
    for _ in range(100):
        k = rng.randint(1, 40)
        f = MapTable(StateSpace.range(k), [rng.randrange(k) for _ in range(k)])
        att = attractor_analysis(f)
        assert sum(len(b) for b in att.basins) == k
        assert frozenset().union(*att.basins) == frozenset(range(k))
        for cyc, basin in zip(att.cycles, att.basins):
            assert set(cyc) <= basin
            assert all(f(cyc[i]) == cyc[(i + 1) % len(cyc)] for i in range(len(cyc)))


def test_p53_structure(p53_fixture):
    b14 = iterate_map(p53_fixture.rest, p53.COLLAPSE_STEPS)
    assert {b14(s) for s in p53_fixture.long_basin} == {6}
    assert p53.PHASE_BLOCKS[0] == frozenset({31, 29, 21, 23})
    assert p53.PHASE_BLOCKS[1] == frozenset({0, 2, 8, 10})
    assert p53.PHASE_BLOCKS[2] == frozenset({11, 15})
    assert p53.PHASE_BLOCKS[3] == frozenset({20, 16})
    for f in (p53_fixture.stress, p53_fixture.rest):
        for block in p53.PHASE_BLOCKS:
            assert len({next(iter(b)) for b in p53.PHASE_BLOCKS if {f(s) for s in block} <= b}) == 1


def test_bn_sources_compile_to_fixture(p53_fixture):
    for name, table in (("p53_stress.bn", p53_fixture.stress), ("p53_rest.bn", p53_fixture.rest)):
        net = parse_network(p53.fixture_path(name).read_text())
        assert net.n == 5
        assert compile(net) == table


def test_tr_invariance(p53_fixture):
    for tr in (1, 3, 5, 10):
        c = iterate_map(p53_fixture.stress, tr)
        att = attractor_analysis(c)
        cyc_states = {s for cyc in att.cycles for s in cyc}
        assert cyc_states == set(p53.LONG_CYCLE) | set(p53.SHORT_CYCLE)


def test_fixture_rejects_corruption(tmp_path, p53_fixture):
    good = {"states": 32, "A": p53_fixture.stress.image.tolist(), "B": p53_fixture.rest.image.tolist()}
    path = tmp_path / "ok.json"
    path.write_text(json.dumps(good))
    assert p53.load_fixture(path) == p53_fixture
    mutations = [("A", 9, 9), ("B", 6, 5), ("A", 31, 20), ("B", 10, 11)]
    for key, idx, val in mutations:
        bad = json.loads(json.dumps(good))
        bad[key][idx] = val
        path.write_text(json.dumps(bad))
        with pytest.raises(p53.FixtureError):
            p53.load_fixture(path)
    path.write_text(json.dumps({"states": 32, "A": good["A"]}))
    with pytest.raises(p53.FixtureError):
        p53.load_fixture(path)


def _expr_strategy():
    leaves = st.one_of(st.sampled_from(NAMES).map(Var), st.booleans().map(Const))
    return st.recursive(leaves, lambda sub: st.one_of(
        sub.map(Not),
        st.tuples(st.sampled_from(["AND", "OR", "XOR"]), sub, sub).map(lambda t: BinOp(*t))), max_leaves=12)


@settings(max_examples=200, deadline=None)
@given(st.lists(_expr_strategy(), min_size=3, max_size=3))
def test_print_parse_roundtrip(rules):
    net = BooleanNetwork(NAMES, tuple(rules))
    again = parse_network(format_network(net))
    assert again == net
    for r in rules:
        assert parse_expr(format_expr(r)) == r


@settings(max_examples=100, deadline=None)
@given(st.lists(_expr_strategy(), min_size=3, max_size=3))
def test_compile_is_total(rules):
    table = compile(BooleanNetwork(NAMES, tuple(rules)))
    assert table.k == 8 and all(0 <= x < 8 for x in table.image.tolist())


def test_exhaustive_two_input_gates():
    for op, fn in (("AND", lambda x, y: x & y), ("OR", lambda x, y: x | y), ("XOR", lambda x, y: x ^ y)):
        table = compile(parse_network(f"node a; node b; a' = a {op} b; b' = b;")).image.tolist()
        for a, b in itertools.product((0, 1), repeat=2):
            assert table[a | (b << 1)] == fn(a, b) | (b << 1)
