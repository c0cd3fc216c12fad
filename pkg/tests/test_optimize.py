import pytest

from sheetlytics import OptimizeSpec, Variable, Workbook, optimize
from sheetlytics.errors import AnalysisError
from sheetlytics.optimize import OptimizationError, golden_section_max


def model(formula, inputs=("A1",)):
    wb = Workbook()
    for a in inputs:
        wb.set_cell(a, 0.0)
        wb.assign_role(a, "decision")
    wb.set_cell("C1", formula)
    wb.calculate_all()
    return wb


def test_golden_section_on_parabola():
    x, fx = golden_section_max(lambda x: -(x - 1.234) ** 2, 0.0, 5.0, 1e-9)
    assert x == pytest.approx(1.234, abs=1e-6)


def test_one_variable_parabola():
    wb = model("=-(A1-3)^2")
    r = optimize(wb, OptimizeSpec([Variable("A1", 0, 10)], "C1"))
    assert r.best_point[0] == pytest.approx(3.0, abs=1e-5)
    wb.set_value("A1", r.best_point[0])
    assert r.best_value == wb.evaluate("C1")  # exact fresh evaluation
    assert not r.multimodal


def test_off_grid_optimum_is_refined():
    wb = model("=-(A1-3.14159)^2")
    r = optimize(wb, OptimizeSpec([Variable("A1", 0, 10)], "C1"))
    assert r.best_point[0] == pytest.approx(3.14159, abs=1e-5)
    assert r.best_value >= r.grid_best_value


def test_minimize_and_restoration():
    wb = model("=(A1-2)^2+1")
    r = optimize(wb, OptimizeSpec([Variable("A1", -5, 5)], "C1", "minimize"))
    assert r.best_point[0] == pytest.approx(2.0, abs=1e-5)
    assert r.best_value == pytest.approx(1.0)
    assert wb.evaluate("A1") == 0.0


def test_apply_leaves_best_point():
    wb = model("=-(A1-3)^2")
    r = optimize(wb, OptimizeSpec([Variable("A1", 0, 10)], "C1"), apply=True)
    assert wb.evaluate("A1") == r.best_point[0]


def test_two_variables():
    wb = model("=-(A1-1)^2-(B1-2)^2-0.5*(A1-1)*(B1-2)", ("A1", "B1"))
    r = optimize(wb, OptimizeSpec([Variable("A1", -5, 5), Variable("B1", -5, 5)], "C1"))
    assert r.best_point == pytest.approx([1.0, 2.0], abs=1e-4)


def test_multimodal_flag():
    wb = model("=-(A1^2-4)^2", ("A1",))
    r = optimize(wb, OptimizeSpec([Variable("A1", -3, 3)], "C1"))
    assert r.multimodal and r.warnings
    assert abs(r.best_point[0]) == pytest.approx(2.0, abs=1e-5)


def test_error_points_are_skipped_until_majority():
    wb = model("=-(A1-3)^2+SQRT(A1)", ("A1",))
    r = optimize(wb, OptimizeSpec([Variable("A1", -4, 10)], "C1"))
    assert r.failed_points > 0 and r.best_point[0] > 0
    wb = model("=SQRT(A1)", ("A1",))
    with pytest.raises(OptimizationError):
        optimize(wb, OptimizeSpec([Variable("A1", -10, 1)], "C1"))


def test_invalid_specs():
    with pytest.raises(AnalysisError):
        Variable("A1", 1, 1)
    with pytest.raises(AnalysisError):
        OptimizeSpec([Variable("A1", 0, 1)] * 2, "C1")
    with pytest.raises(AnalysisError):
        OptimizeSpec([Variable("A1", 0, 1)], "C1", "sideways")


def test_demo_linear_profit_prefers_fewest_reps(demo):
    r = optimize(demo, OptimizeSpec([Variable("E7", 0, 300)], "G13"))
    assert r.best_point == [0.0]
    assert demo.evaluate("E7") == 125.0


def test_demo_rep_count_boundary_optimum(demo):
    r = optimize(demo, OptimizeSpec([Variable("E7", 0, 200)], "G13"))
    assert r.best_point == [0.0]


def test_separable_quadratic():
    wb = model("=-((A1-1)^2+(B1-2)^2)", ("A1", "B1"))
    r = optimize(wb, OptimizeSpec([Variable("A1", 0, 5), Variable("B1", 0, 5)], "C1"))
    assert r.best_point == pytest.approx([1.0, 2.0], abs=1e-4)
