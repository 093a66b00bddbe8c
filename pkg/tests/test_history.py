import json

import numpy as np
import pytest

from decrn import (
    ConstantHistory,
    CrnParseError,
    ExpressionHistory,
    PreconditionError,
    SampledHistory,
    history_from_json,
    load_history,
)
from decrn.exprs import parse_expression


def test_expression_parsing_and_eval():
    ast = parse_expression("2*sin(s)+3")
    assert ast.eval(0.0) == pytest.approx(3.0)
    s = np.linspace(-1, 0, 5)
    assert ast.eval(s) == pytest.approx(2 * np.sin(s) + 3)


def test_expression_precedence_and_power():
    assert parse_expression("2^3^2").eval(0.0) == pytest.approx(512.0)  # right assoc
    assert parse_expression("-2^2").eval(0.0) == pytest.approx(-4.0)
    assert parse_expression("2*3+4/2").eval(0.0) == pytest.approx(8.0)
    assert parse_expression("exp(0)+cos(0)").eval(0.0) == pytest.approx(2.0)


def test_expression_errors():
    for text in ("", "sin s", "2 +", "foo(s)", "(1", "1 ) 2"):
        with pytest.raises(CrnParseError):
            parse_expression(text)


def test_constant_history_positivity():
    with pytest.raises(PreconditionError, match="positive"):
        ConstantHistory([1.0, 0.0], tau_max=1.0)
    hist = ConstantHistory([1.0, 2.0], tau_max=1.5)
    assert hist(-1.0) == pytest.approx([1.0, 2.0])
    assert hist(np.array([-1.0, 0.0])).shape == (2, 2)


def test_history_domain_is_enforced():
    hist = ConstantHistory([1.0], tau_max=1.0)
    with pytest.raises(PreconditionError, match="outside"):
        hist(-2.0)
    with pytest.raises(PreconditionError, match="outside"):
        hist(0.5)
    # tiny numerical slack is clamped, not an error
    assert hist(-1.0 - 1e-12) == pytest.approx([1.0])


def test_expression_history_positivity_is_sampled():
    # sin(s) + 0.5 dips below zero inside [-pi, 0]
    with pytest.raises(PreconditionError, match="positive"):
        ExpressionHistory(["sin(s)+0.5"], tau_max=3.5)
    ok = ExpressionHistory(["sin(s)+2"], tau_max=3.5)
    assert ok.smooth


def test_sampled_history_interpolation_orders():
    grid = np.linspace(-2.0, 0.0, 9)
    values = np.column_stack([2 + np.sin(grid), 1.5 + 0.2 * grid])
    cubic = SampledHistory(grid, values, order=3)
    linear = SampledHistory(grid, values, order=1)
    assert cubic.tau_max == 2.0 and not cubic.smooth
    mid = -0.125
    assert cubic(mid) == pytest.approx(linear(mid), abs=5e-2)
    # knots reproduce the data exactly
    assert cubic(grid[3]) == pytest.approx(values[3], abs=1e-14)
    assert linear(grid[3]) == pytest.approx(values[3], abs=1e-14)


def test_sampled_history_validation():
    grid = np.array([-1.0, 0.0])
    with pytest.raises(PreconditionError):
        SampledHistory(grid, np.array([[1.0], [-1.0]]))
    with pytest.raises(PreconditionError, match="increasing"):
        SampledHistory(np.array([0.0, -1.0]), np.ones((2, 1)))
    with pytest.raises(PreconditionError, match="end at"):
        SampledHistory(np.array([-2.0, -1.0]), np.ones((2, 1)))
    with pytest.raises(PreconditionError, match="order"):
        SampledHistory(grid, np.ones((2, 1)), order=2)


def test_history_json_round_trip(tmp_path):
    specs = [
        {"type": "constant", "value": [1.0, 2.0]},
        {"type": "sampled", "grid": [-1.0, -0.5, 0.0], "values": [[1.0], [2.0], [1.5]], "order": 3},
        {"type": "expr", "exprs": ["sin(s)+2"]},
    ]
    for spec in specs:
        n = len(spec["value"]) if spec["type"] == "constant" else 1
        hist = history_from_json(spec, tau_max=1.0, n_species=n)
        again = history_from_json(hist.to_json(), tau_max=1.0, n_species=n)
        probe = np.linspace(-1.0, 0.0, 7)
        assert np.allclose(hist(probe), again(probe))


def test_history_json_errors(tmp_path):
    with pytest.raises(CrnParseError, match="type"):
        history_from_json({"value": [1.0]}, tau_max=1.0)
    with pytest.raises(CrnParseError, match="unknown history type"):
        history_from_json({"type": "spline"}, tau_max=1.0)
    with pytest.raises(PreconditionError, match="tau_max"):
        history_from_json({"type": "constant", "value": [1.0]})
    with pytest.raises(PreconditionError, match="species"):
        history_from_json({"type": "constant", "value": [1.0]}, tau_max=1.0, n_species=2)
    # sampled grid too short for the network delays
    with pytest.raises(PreconditionError, match="covers"):
        history_from_json(
            {"type": "sampled", "grid": [-1.0, 0.0], "values": [[1.0], [1.0]]}, tau_max=2.0
        )
    bad = tmp_path / "h.json"
    bad.write_text("{not json")
    with pytest.raises(CrnParseError, match="JSON"):
        load_history(bad, tau_max=1.0)


def test_load_history_file(tmp_path):
    path = tmp_path / "h.json"
    path.write_text(json.dumps({"type": "constant", "value": [2.0, 3.0, 1.0]}))
    hist = load_history(path, tau_max=4.0, n_species=3)
    assert hist(-4.0) == pytest.approx([2.0, 3.0, 1.0])
