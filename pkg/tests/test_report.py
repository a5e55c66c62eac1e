import json

from flipreduce.generate import GenConfig, gen_instance
from flipreduce.reduction import ReductionOptions, reduce
from flipreduce.report import ROWS, dumps, format_table, metrics_from_result, report_metrics, result_dict


def test_untouched_instance_reports_zero(pp4):
    r = report_metrics(reduce(pp4, 10), 0)
    assert r.fixed == r.flipped == r.permanent == r.permanent_edges == r.forbidden_edges == 0
    assert r.resolved is None and r.flips == 0


def test_flips_relative(conflict3):
    S = reduce(conflict3, 1)
    r = report_metrics(S, 1)
    assert r.flips_relative == 100.0 * S.flips_charged()


def test_metrics_recomputed_from_json():
    M, _, _ = gen_instance(GenConfig(n=12, s=3, keep=0.75, nni_moves=1, seed=2))
    S = reduce(M, 3, ReductionOptions(use_bounds=True, lb_restarts=5))
    direct = report_metrics(S, 3)
    data = json.loads(dumps(result_dict(S)))
    assert metrics_from_result(M, data, 3) == direct


def test_two_decimal_json():
    text = dumps({"a": 1.0, "b": [2.345, {"c": 0.0}], "d": 3, "e": None})
    assert '"a": 1.00' in text and "2.35" in text and '"c": 0.00' in text and '"d": 3' in text
    assert json.loads(text)["b"][0] == 2.35


def test_table_layout():
    M, _, _ = gen_instance(GenConfig(n=12, s=3, keep=0.75, nni_moves=1, seed=2))
    S = reduce(M, 3)
    text = format_table(report_metrics(S, 3), {"n": 12, "s": 3})
    lines = text.splitlines()
    assert lines[0].startswith("Taxa n") and lines[1].startswith("Input trees s")
    assert [l.rsplit(None, 1)[0].strip() for l in lines[2:]] == [label for _, label in ROWS]
    assert len({len(l) for l in lines}) == 1
