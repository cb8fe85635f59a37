import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blogcap.errors import EmptyFile, IoFailure, MalformedRow, UnknownSeed
from blogcap.graph import (
    BlogNetwork,
    degree_sequences,
    delineate_snowball,
    load_edge_list,
    write_edge_list,
)
from conftest import write_edges
from oracles import induced_subgraph_bruteforce, random_digraph


def test_load_two_rows(tmp_path):
    net = load_edge_list(write_edges(tmp_path / "e.csv", [("A", "B"), ("A", "C")]))
    assert net.nodes == ("A", "B", "C")
    assert net.edge_set == {("A", "B"), ("A", "C")}


def test_duplicate_rows_collapse_with_warning(tmp_path, caplog):
    with caplog.at_level(logging.WARNING, logger="blogcap.graph"):
        net = load_edge_list(write_edges(tmp_path / "e.csv", [("A", "B"), ("A", "B")]))
    assert len(net) == 2 and len(net.edges) == 1
    assert len([r for r in caplog.records if "duplicate" in r.message]) == 1


def test_self_loop_dropped_with_warning(tmp_path, caplog):
    with caplog.at_level(logging.WARNING, logger="blogcap.graph"):
        net = load_edge_list(write_edges(tmp_path / "e.csv", [("A", "A")]))
    assert net.nodes == ("A",) and net.edges == ()
    assert len([r for r in caplog.records if "self-loop" in r.message]) == 1


def test_crlf_accepted(tmp_path):
    p = tmp_path / "e.csv"
    p.write_bytes(b"source_id,target_id\r\nA,B\r\nB,C\r\n")
    assert load_edge_list(p).edge_set == {("A", "B"), ("B", "C")}


@pytest.mark.parametrize(
    "body, line",
    [
        ("A,B\nA,B,C\n", 3),
        ("A\n", 2),
        ('"A,1",B\n', 2),
        ("A,\n", 2),
    ],
)
def test_malformed_rows(tmp_path, body, line):
    p = tmp_path / "e.csv"
    p.write_text("source_id,target_id\n" + body)
    with pytest.raises(MalformedRow) as exc:
        load_edge_list(p)
    assert exc.value.line == line


def test_header_required(tmp_path):
    p = tmp_path / "e.csv"
    p.write_text("A,B\nB,C\n")
    with pytest.raises(MalformedRow):
        load_edge_list(p)


@pytest.mark.parametrize("text", ["", "source_id,target_id\n", "\n\n"])
def test_empty_file(tmp_path, text):
    p = tmp_path / "e.csv"
    p.write_text(text)
    with pytest.raises(EmptyFile):
        load_edge_list(p)


def test_missing_file(tmp_path):
    with pytest.raises(IoFailure):
        load_edge_list(tmp_path / "nope.csv")


def test_load_is_idempotent_and_roundtrips(tmp_path, rng):
    net = random_digraph(rng, 10)
    p = tmp_path / "e.csv"
    write_edge_list(net, p)
    a, b = load_edge_list(p), load_edge_list(p)
    assert a == b and a.nodes == b.nodes and a.edges == b.edges
    assert a.edge_set == net.edge_set


def test_network_invariants_enforced():
    with pytest.raises(ValueError):
        BlogNetwork(["A"], [("A", "A")])
    with pytest.raises(ValueError):
        BlogNetwork(["A", "B"], [("A", "B"), ("A", "B")])
    with pytest.raises(ValueError):
        BlogNetwork(["A"], [("A", "B")])


def test_snowball_example():
    net = BlogNetwork("ABCD", [("A", "B"), ("A", "C"), ("B", "C"), ("C", "D")])
    sub = delineate_snowball(net, "A")
    assert sub.nodes == ("A", "B", "C")
    assert sub.edge_set == {("A", "B"), ("A", "C"), ("B", "C")}


def test_snowball_keeps_edges_back_to_seed():
    net = BlogNetwork("ABC", [("A", "B"), ("B", "A"), ("C", "A")])
    assert delineate_snowball(net, "A").edge_set == {("A", "B"), ("B", "A")}


def test_snowball_seed_cites_nothing():
    sub = delineate_snowball(BlogNetwork("AB", [("A", "B")]), "B")
    assert sub.nodes == ("B",) and sub.edges == ()


def test_snowball_unknown_seed():
    with pytest.raises(UnknownSeed):
        delineate_snowball(BlogNetwork("AB", [("A", "B")]), "Z")


def test_snowball_depth_two():
    net = BlogNetwork("ABCDE", [("A", "B"), ("B", "C"), ("C", "D"), ("E", "A")])
    assert delineate_snowball(net, "A", depth=2).nodes == ("A", "B", "C")
    assert delineate_snowball(net, "A", depth=0).nodes == ("A",)


def test_snowball_matches_bruteforce_n12(rng):
    for _ in range(25):
        net = random_digraph(rng, 12)
        seed = net.nodes[rng.integers(len(net))]
        sub = delineate_snowball(net, seed)
        nodes, edges = induced_subgraph_bruteforce(net, seed)
        assert list(sub.nodes) == nodes
        assert sub.edge_set == edges
        assert len(sub) == 1 + degree_sequences(net)[seed][1]


def test_degree_sequences_examples():
    assert degree_sequences(BlogNetwork(["A"])) == {"A": (0, 0)}
    deg = degree_sequences(BlogNetwork("ABC", [("A", "B"), ("C", "B")]))
    assert deg["B"] == (2, 0)


def test_degree_sequences_match_dense_matrix(rng):
    for _ in range(10):
        net = random_digraph(rng, 8)
        a = net.adjacency_matrix()
        deg = degree_sequences(net)
        assert [deg[v][0] for v in net.nodes] == a.sum(axis=0).tolist()
        assert [deg[v][1] for v in net.nodes] == a.sum(axis=1).tolist()


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 9), st.integers(0, 2**32 - 1))
def test_degree_sums_equal_edge_count(n, seed):
    net = random_digraph(np.random.default_rng(seed), n)
    deg = degree_sequences(net)
    assert sum(d[0] for d in deg.values()) == sum(d[1] for d in deg.values()) == len(net.edges)


def test_symmetrized_is_mutual():
    net = BlogNetwork("ABC", [("A", "B"), ("B", "C"), ("C", "B")])
    sym = net.symmetrized()
    assert sym.edge_set == {("A", "B"), ("B", "A"), ("B", "C"), ("C", "B")}
