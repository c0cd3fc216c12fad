import pytest

from sheetlytics import demo_workbook, dump_workbook, load_workbook, parse_spec
from sheetlytics.errors import SpecFormatError, WorkbookFormatError
from sheetlytics.fileformat import demo_workbook_text, strip_comment


def test_demo_round_trip_is_cell_by_cell_equal(demo):
    again = load_workbook(dump_workbook(demo))
    assert again.cells == demo.cells
    assert again.roles == demo.roles
    assert again.scenarios == demo.scenarios
    assert dump_workbook(again) == dump_workbook(demo)


def test_duplicate_address():
    with pytest.raises(WorkbookFormatError, match="duplicate address C4"):
        load_workbook("[cells]\nC4: 1\nC4: 2\n")


def test_cycle_is_a_load_error_naming_the_cell():
    with pytest.raises(WorkbookFormatError, match="G13"):
        load_workbook("[cells]\nG13: =G13\n")


def test_errors_carry_line_numbers():
    with pytest.raises(WorkbookFormatError, match="line 3"):
        load_workbook("[cells]\nA1: 1\nA2: =1+\n")


def test_role_on_wrong_kind_of_cell():
    with pytest.raises(WorkbookFormatError, match="line 4: data role requires a number"):
        load_workbook('[cells]\nA1: =1+1\n[roles]\ndata A1 "x"\n')


def test_comments_and_quoted_hashes():
    assert strip_comment('A1: "#1 item" # trailing') == 'A1: "#1 item" '
    wb = load_workbook('# header\n[cells]\nA1: "#1"  # note\nA2: 2.5e1\n')
    assert wb.evaluate("A1") == "#1" and wb.evaluate("A2") == 25.0


def test_roles_may_precede_cells_in_file():
    wb = load_workbook('[roles]\nperformance B1 "Out"\n[cells]\nA1: 2\nB1: =A1*2\n')
    assert wb.benchmarks and wb.label("B1") == "Out"


def test_scenario_columns_must_be_inputs():
    with pytest.raises(WorkbookFormatError):
        load_workbook('[cells]\nA1: 1\nB1: =A1\n[scenarios]\ncolumns B1\n1 "x" 2\n')


def test_demo_text_is_bundled():
    assert "[scenarios]" in demo_workbook_text()
    assert len(demo_workbook().scenarios) == 7


def test_parse_spec_blocks_and_repeated_keys():
    blocks = parse_spec(
        '# spec\n[tornado t1]\noutput = G13\ninput = D6 0.58 0.88 "Belex margin"\ninput = C4 50000 75000\n'
        "[scenario all]\n"
    )
    assert [(b.kind, b.name) for b in blocks] == [("tornado", "t1"), ("scenario", "all")]
    assert len(blocks[0].get_all("input")) == 2
    with pytest.raises(SpecFormatError):
        blocks[0].get("input")


@pytest.mark.parametrize(
    "text",
    ["[bogus x]\n", "[whatif]\n", "[whatif a]\n[sweep1 a]\n", "key = 1\n", "[whatif a]\nnot a pair\n"],
)
def test_bad_specs(text):
    with pytest.raises(SpecFormatError):
        parse_spec(text)


def test_empty_spec_has_no_blocks():
    assert parse_spec("# nothing here\n\n") == []
