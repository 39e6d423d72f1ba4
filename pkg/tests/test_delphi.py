import json
import math
import statistics

import pytest
from hypothesis import given, settings, strategies as st

from grant_maturity.data import RubricId
from grant_maturity.delphi import (
    CentralStatistic, EvaluatorResponse, aggregate_responses, aggregates_from_dict, aggregates_to_dict,
    parse_responses, serialize_responses, validate_response,
)
from grant_maturity.errors import EmptyPanelError, InvalidResponseError, SchemaError
from grant_maturity.templates import responses_template

FAO, PSO, GOV, EFI, TAC, COM = RubricId


def resp(who, rubric_scores, comment=True):
    scores = {r: subs for r, subs in rubric_scores.items()}
    comments = {(r, s): "because" for r, subs in scores.items() for s in subs} if comment else {}
    return EvaluatorResponse(who, scores, "overall reasoning", comments)


def test_two_evaluators_agree_on_mean():
    out = aggregate_responses([resp("a", {GOV: {"x": 3}}), resp("b", {GOV: {"x": 5}})])
    g = out[GOV]
    assert g.central == 4.0
    assert g.evaluator_count == 2
    assert g.dispersion == pytest.approx(math.sqrt(2), abs=1e-12)


def test_subcategory_mean_before_panel():
    out = aggregate_responses([resp("a", {GOV: {"x": 3, "y": 5}})])
    assert out[GOV].central == 4.0
    assert out[GOV].dispersion == 0.0
    assert not out[GOV].low_consensus


def test_three_evaluators():
    out = aggregate_responses([resp(w, {FAO: {"s": v}}) for w, v in zip("abc", [3, 4, 5])])
    assert out[FAO].central == 4.0
    assert out[FAO].dispersion == 1.0
    assert not out[FAO].low_consensus


def test_low_consensus():
    out = aggregate_responses([resp("a", {TAC: {"s": 2}}), resp("b", {TAC: {"s": 5}})])
    assert round(out[TAC].dispersion, 4) == 2.1213
    assert out[TAC].low_consensus
    relaxed = aggregate_responses([resp("a", {TAC: {"s": 2}}), resp("b", {TAC: {"s": 5}})], threshold=3.0)
    assert not relaxed[TAC].low_consensus


def test_median():
    panel = [resp(w, {COM: {"s": v}}) for w, v in zip("abcd", [1, 2, 5, 5])]
    assert aggregate_responses(panel, CentralStatistic.MEAN)[COM].central == 3.25
    assert aggregate_responses(panel, "median")[COM].central == 3.5


def test_rubrics_without_scores_are_absent():
    out = aggregate_responses([resp("a", {GOV: {"x": 3}})])
    assert list(out) == [GOV]


def test_empty_panel():
    with pytest.raises(EmptyPanelError):
        aggregate_responses([])


def test_invalid_scores_rejected():
    with pytest.raises(InvalidResponseError, match="GOV/x"):
        aggregate_responses([resp("a", {GOV: {"x": 5.5}})])


def test_conflicting_duplicate():
    with pytest.raises(InvalidResponseError, match="conflicting"):
        aggregate_responses([resp("a", {GOV: {"x": 3}}), resp("a", {GOV: {"x": 4}})])


class TestValidateResponse:
    def test_clean(self):
        assert validate_response(resp("a", {GOV: {"x": 3}})).findings == ()

    def test_out_of_range_names_subcategory(self):
        report = validate_response(resp("a", {GOV: {"mission": 5.5}}))
        [f] = report.errors
        assert f.code == "score_out_of_range"
        assert f.subject == "a: GOV/mission"

    def test_missing_comment_is_warning(self):
        report = validate_response(resp("a", {GOV: {"x": 3}}, comment=False))
        assert report.ok
        assert [f.code for f in report.warnings] == ["missing_comment"]

    def test_structural(self):
        r = EvaluatorResponse(" ", {}, "")
        codes = {f.code for f in validate_response(r).errors}
        assert codes == {"missing_evaluator_id", "missing_justification", "no_scores"}


class TestParsing:
    def test_template_round_trip(self):
        parsed = parse_responses(json.dumps(responses_template()))
        assert parse_responses(serialize_responses(parsed)) == parsed
        assert all(validate_response(r).ok for r in parsed)

    @pytest.mark.parametrize("doc", [
        {"evaluator_id": "a"},
        [{"evaluator_id": "a", "scores": {"XYZ": {"s": 3}}, "overall_justification": "j"}],
        [{"evaluator_id": "a", "scores": {"GOV": {"s": "3"}}, "overall_justification": "j"}],
        [{"evaluator_id": "a", "scores": {}, "overall_justification": "j", "extra": 1}],
    ])
    def test_rejects(self, doc):
        with pytest.raises(SchemaError):
            parse_responses(json.dumps(doc))

    def test_aggregate_dict_round_trip(self):
        out = aggregate_responses(parse_responses(json.dumps(responses_template())), "median")
        assert aggregates_from_dict(json.loads(json.dumps(aggregates_to_dict(out)))) == out


score = st.integers(1, 5).map(float) | st.floats(1, 5)
panels = st.lists(st.dictionaries(st.sampled_from(["s1", "s2", "s3"]), score, min_size=1),
                  min_size=1, max_size=8)


def _panel(subs):
    return [resp(f"e{i}", {EFI: s}) for i, s in enumerate(subs)]


@settings(max_examples=100)
@given(panels, st.randoms(use_true_random=False), st.sampled_from(list(CentralStatistic)))
def test_permutation_invariant(subs, rng, central):
    panel = _panel(subs)
    shuffled = list(panel)
    rng.shuffle(shuffled)
    assert aggregate_responses(panel, central) == aggregate_responses(shuffled, central)


@settings(max_examples=100)
@given(panels, st.data())
def test_duplicate_submission_changes_nothing(subs, data):
    panel = _panel(subs)
    dup = data.draw(st.sampled_from(panel))
    assert aggregate_responses(panel + [dup])[EFI] == aggregate_responses(panel)[EFI]


@settings(max_examples=100)
@given(panels)
def test_matches_statistics_module(subs):
    per = [statistics.fmean(s.values()) for s in subs]
    g = aggregate_responses(_panel(subs))[EFI]
    assert abs(g.central - statistics.fmean(per)) <= 1e-12
    expected_sd = statistics.stdev(per) if len(per) > 1 else 0.0
    assert abs(g.dispersion - expected_sd) <= 1e-12
    assert 1.0 <= g.central <= 5.0
