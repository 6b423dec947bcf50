import io
import math

import pytest
from hypothesis import given, settings, strategies as st

from conftest import data_path, random_instance
from mbsmp.io import (ParseError, append_report_rows, format_instance, format_number,
                      load_instance, parse_instance, read_edge_list, read_report,
                      save_instance, simple_edges)

FIG1 = open(data_path("figure1.txt"), encoding="utf-8").read()


def test_fixture_is_canonical():
    assert format_instance(parse_instance(FIG1)) == FIG1


def test_save_load_save_bytes(tmp_path):
    inst = random_instance(4, costs=[math.inf, 1.5, 2, 0, 1])
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    save_instance(inst, a)
    save_instance(load_instance(a), b)
    assert a.read_bytes() == b.read_bytes()
    assert load_instance(a) == inst


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_roundtrip_property(seed):
    inst = random_instance(seed, p_live=0.3)
    text = format_instance(inst)
    assert format_instance(parse_instance(text)) == text


def test_comments_and_wrapped_scenarios():
    text = """# a tiny instance
    3 2 1 1.5   # header
    costs inf 1
    seeds 0
    arcs 2
    0 1 0
    1 2 1
    scenario 0 2
    0
    1
    """
    inst = parse_instance(text)
    assert inst.budget == 1.5 and math.isinf(inst.costs[0])
    assert inst.scenarios[0].tolist() == [0, 1]


@pytest.mark.parametrize("mutate, line", [
    (lambda t: t.replace("costs 1 1 1 1", "costs 1 1 1"), 2),
    (lambda t: t.replace("arcs 9\n0 1 1", "arcs 9\n0 1 7"), 5),
    (lambda t: t.replace("seeds 0 3", "seeds 0 x"), 3),
    (lambda t: t.replace("scenario 1 6", "scenario 2 6"), None),
    (lambda t: t + "extra\n", None),
])
def test_parse_errors(mutate, line):
    with pytest.raises(ParseError) as info:
        parse_instance(mutate(FIG1))
    if line is not None:
        assert info.value.line == line


def test_truncated_file():
    with pytest.raises(ParseError):
        parse_instance(FIG1[:60])


def test_format_number():
    assert [format_number(v) for v in (math.inf, 3.0, 0.25)] == ["inf", "3", "0.25"]


def test_edge_list_densify():
    n, edges, ids = read_edge_list(io.StringIO("# c\n5 900\n900 7\n"))
    assert n == 3 and edges == [(0, 1), (1, 2)] and ids == [5, 900, 7]


def test_edge_list_error_line():
    with pytest.raises(ParseError) as info:
        read_edge_list(io.StringIO("# c\n0 1\n1\n"))
    assert info.value.line == 3
    with pytest.raises(ParseError):
        read_edge_list(io.StringIO("0 a\n"))


def test_simple_edges():
    edges = [(0, 1), (1, 0), (1, 1), (0, 1), (1, 2)]
    assert simple_edges(edges, True) == [(0, 1), (1, 2)]
    assert simple_edges(edges, False) == [(0, 1), (1, 0), (1, 2)]


def test_report_append(tmp_path):
    path = tmp_path / "r.csv"
    append_report_rows(path, [{"instance": "a", "setting": "i", "UB": "1.5"}])
    append_report_rows(path, [{"instance": "b", "setting": "g"}])
    rows = read_report(path)
    assert [r["instance"] for r in rows] == ["a", "b"]
    assert path.read_text().startswith("instance,setting,t_s,UB,LB,gap,LB0,nBB,nIntCut,nFrCut,opt\n")
