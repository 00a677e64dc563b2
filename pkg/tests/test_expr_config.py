import math

import pytest

from stationary_finsler import expr, load_zoo
from stationary_finsler.config import build_metric, parse_config
from stationary_finsler.errors import ConfigError, ExpressionError
from stationary_finsler.types import ConeKind


def test_precedence_and_power():
    f = expr.compile_base("1 + 2*x1^2 - -x2/4", 2)
    assert f([3.0, 8.0]) == pytest.approx(1 + 18 + 2)
    assert expr.compile_base("-x1^2", 1)([3.0]) == -9.0
    assert expr.compile_base("2^3^2", 1)([0.0]) == 512.0


def test_functions_and_constants():
    f = expr.compile_fiber("sqrt(y1^2 + y2^2) + sin(pi/2) + log(exp(x1))", 2)
    assert f([0.5, 0.0], [3.0, 4.0]) == pytest.approx(6.5)


def test_unknown_name_reports_column():
    with pytest.raises(ExpressionError) as exc:
        expr.parse("x1 + z9", ["x1"])
    assert exc.value.column == 6


def test_bad_character_reports_column():
    with pytest.raises(ExpressionError) as exc:
        expr.parse("x1 $ 2", ["x1"])
    assert exc.value.column == 4


def test_unbalanced_parenthesis():
    with pytest.raises(ExpressionError):
        expr.parse("(x1 + 1", ["x1"])


EXPR_METRIC = """
[metric]
n = 2
[lambda]
expr = 1
[B]
expr = 0.5*y1
linear = yes
[F]
f2 = y1^2 + y2^2
[cone]
kind = FullSlit
"""


def test_expression_metric_matches_zoo(rng):
    L = build_metric(parse_config(EXPR_METRIC))
    ref = load_zoo("flat_randers")
    assert L.cone.kind is ConeKind.FULL_SLIT
    for _ in range(20):
        z, w = rng.normal(size=3), rng.normal(size=3)
        assert L(z, w) == pytest.approx(ref(z, w), abs=1e-14)


def test_f_expression_is_squared():
    text = EXPR_METRIC.replace("f2 = y1^2 + y2^2", "expr = sqrt(y1^2 + y2^2)")
    L = build_metric(parse_config(text))
    assert L([0, 0, 0], [0, 3.0, 4.0]) == pytest.approx(25.0)


def test_zoo_metric_with_params():
    cfg = parse_config("[metric]\nzoo = kerr_perturbation\n[params]\na = 0.3\n")
    L = build_metric(cfg)
    assert L.params["a"] == 0.3


def test_unknown_key_has_line_and_column():
    with pytest.raises(ConfigError) as exc:
        parse_config("[metric]\nzoo = flat_randers\nbogus = 1\n")
    assert (exc.value.line, exc.value.column) == (3, 1)
    assert "bogus" in str(exc.value)


def test_unknown_section_has_line():
    with pytest.raises(ConfigError) as exc:
        parse_config("[metric]\nzoo = flat_randers\n\n[nonsense]\nx = 1\n")
    assert exc.value.line == 4


def test_expression_error_maps_to_file_column():
    text = "[metric]\nn = 2\n[lambda]\nexpr = 1 + x1 @ 2\n[B]\nexpr = 0\n[F]\nf2 = y1^2+y2^2\n[cone]\nkind = FullSlit\n"
    with pytest.raises(ConfigError) as exc:
        build_metric(parse_config(text))
    assert exc.value.line == 4
    assert exc.value.column == text.splitlines()[3].index("@") + 1


def test_unknown_zoo_name():
    with pytest.raises(ConfigError):
        build_metric(parse_config("[metric]\nzoo = nope\n"))


def test_bad_cone_kind():
    with pytest.raises(ConfigError):
        build_metric(parse_config(EXPR_METRIC.replace("FullSlit", "Sideways")))


def test_missing_metric_section():
    with pytest.raises(ConfigError):
        build_metric(parse_config(EXPR_METRIC.replace("[B]\nexpr = 0.5*y1\nlinear = yes\n", "")))


def test_constant_vectors():
    cfg = parse_config("[shoot]\nx0 = 0, pi/2\nx1 = 1,0;2,3\n", {"shoot": {"x0", "x1"}})
    assert cfg.vector("shoot", "x0") == [0.0, math.pi / 2]
    assert cfg.vectors("shoot", "x1") == [[1.0, 0.0], [2.0, 3.0]]


def test_bad_number_is_located():
    cfg = parse_config("[run]\nseed = seven\n")
    with pytest.raises(ConfigError) as exc:
        cfg.number("run", "seed", kind=int)
    assert exc.value.line == 2
