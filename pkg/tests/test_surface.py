import string

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from conftest import model_text
from cwcsim.matching import CompartmentPattern
from cwcsim.surface import (
    Col,
    NseDecl,
    ParseError,
    Rect,
    Row,
    SeDecl,
    Singleton,
    SmeDecl,
    WholeGrid,
    parse_coord_expr,
    parse_model,
    parse_term_text,
)
from cwcsim.terms import Atom, Compartment, Term


def test_am_calospora_model_parses():
    model, diags = parse_model(model_text("am_calospora.cwc"))
    assert diags == []
    assert (model.rows, model.cols) == (1, 13)
    assert len(model.rules) == 9
    assert len(model.cells) == 2
    assert len(model.monitors) == 2


def test_am_glomus_and_river_parse():
    for name in ("am_glomus.cwc", "river.cwc"):
        model, diags = parse_model(model_text(name))
        assert diags == [], (name, diags)


def test_empty_model_is_valid():
    model, diags = parse_model("model M ; grid 10 , 10 ;")
    assert diags == []
    assert model.name == "M"
    assert (model.rows, model.cols) == (10, 10)
    assert model.rules == ()


def test_missing_semicolon_reports_line():
    model, diags = parse_model("model M ; grid 2 , 2\ncell <*> {s} a ;")
    assert model is None
    assert len(diags) == 1
    assert diags[0].line == 2


def test_sections_must_appear_in_order():
    model, diags = parse_model("model M ; grid 2 , 2 ; cell <*> {s} a ; nse {s} a [1.0] b ;")
    assert model is None
    assert "out of order" in diags[0].message


def test_duplicate_grid_rejected():
    model, diags = parse_model("model M ; grid 2 , 2 ; grid 3 , 3 ;")
    assert model is None
    assert "duplicate grid" in diags[0].message


def test_coord_expr_union_forms():
    assert parse_coord_expr("6,6 rect[1,1 3,2] col[5]") == (
        Singleton(6, 6),
        Rect(1, 1, 3, 2),
        Col(5),
    )
    assert parse_coord_expr("*") == (WholeGrid(),)
    assert parse_coord_expr("row[2]") == (Row(2),)


def test_coord_expr_rejects_garbage():
    with pytest.raises(ParseError):
        parse_coord_expr("rect[1,1]")
    with pytest.raises(ParseError):
        parse_coord_expr("")


def test_term_text_examples():
    t = parse_term_text("2 a b ({l} c d | e f)")
    assert t.multiplicity(Atom("a")) == 2
    assert t.multiplicity(Atom("b")) == 1
    comp = [e for e, _n in t.items if isinstance(e, Compartment)][0]
    assert comp.label == "l"
    assert parse_term_text("\\e") == Term()


def test_pattern_text_compartment_variables():
    p = parse_term_text("({l1} a $x | $X)", "pattern")
    cp = p.items[0][0]
    assert isinstance(cp, CompartmentPattern)
    assert cp.wrap_var == "x"
    assert cp.content_var == "X"


def test_ground_mode_rejects_variables():
    with pytest.raises(ParseError):
        parse_term_text("$X", "ground")


def test_reserved_variable_names_rejected():
    with pytest.raises(ParseError):
        parse_term_text("({l} $x__0 | $X)", "pattern")


def test_variable_sort_enforced_by_position():
    # wrap variables are lowercase, content variables uppercase
    with pytest.raises(ParseError):
        parse_term_text("({l} $X | $Y)", "pattern")
    with pytest.raises(ParseError):
        parse_term_text("({l} $x | $y)", "pattern")


def test_top_level_content_variable_rejected_in_patterns():
    # the remainder variable is implicit, never written
    with pytest.raises(ParseError):
        parse_term_text("a $X", "pattern")


def test_direction_shorthands():
    model, diags = parse_model(
        "model M ; grid 3 , 3 ;\n"
        "sme [+] {s} a {s} \\e [1.0] \\e _ a ;\n"
        "sme [x] {s} b {s} \\e [1.0] \\e _ b ;\n"
        "sme [*] {s} c {s} \\e [1.0] \\e _ c ;\n"
        "sme [E,W,E] {s} d {s} \\e [1.0] \\e _ d ;\n"
        "cell <*> {s} \\e ;"
    )
    assert diags == []
    dirs = [r.directions for r in model.rules]
    assert dirs[0] == ("N", "S", "E", "W")
    assert dirs[1] == ("NW", "NE", "SW", "SE")
    assert len(dirs[2]) == 8
    assert dirs[3] == ("E", "W")  # duplicates removed, order kept


def test_rule_declaration_shapes():
    model, diags = parse_model(
        "model M ; grid 2 , 2 ;\n"
        "nse {c} a [0.5] b ;\n"
        "se <1,1> {s} a [1.0] {t} b ;\n"
        "sme <row[1]> [E] {s} a {s} \\e [1.0] {t} \\e _ a ;\n"
        "cell <*> {s} \\e ;"
    )
    assert diags == []
    nse, se, sme = model.rules
    assert isinstance(nse, NseDecl) and nse.label == "c"
    assert isinstance(se, SeDecl) and se.new_label == "t"
    assert isinstance(sme, SmeDecl)
    assert sme.new_label1 == "t" and sme.new_label2 is None
    assert sme.coords == (Row(1),)


def test_monitor_optional_parts():
    model, diags = parse_model(
        "model M ; grid 1 , 2 ; cell <*> {s} \\e ;\n"
        "monitor m1 <1,1> {s} a ;\n"
        "monitor m2 {s} a ;\n"
        "monitor m3 a ;"
    )
    assert diags == []
    m1, m2, m3 = model.monitors
    assert m1.coords == (Singleton(1, 1),) and m1.label == "s"
    assert m2.coords is None and m2.label == "s"
    assert m3.coords is None and m3.label is None


def test_comments_are_ignored():
    model, diags = parse_model("# heading\nmodel M ; # trailing\ngrid 1 , 1 ;\ncell <*> {s} \\e ;")
    assert diags == []
    assert model.name == "M"


@settings(max_examples=300)
@given(st.text(alphabet=string.printable, max_size=120))
def test_parser_never_crashes(text):
    model, diags = parse_model(text)
    assert (model is None) == bool(diags)
    for d in diags:
        assert d.line >= 1 and d.col >= 1
