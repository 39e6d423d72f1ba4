"""Example input files emitted by ``grant-maturity template``.

Everything here is synthetic: indicator names, programs and values are
illustrative placeholders, not measurements of any real grant program.
"""

from __future__ import annotations

import json

SYNTHETIC_NOTE = ("SYNTHETIC TEMPLATE. Indicators, programs and values are illustrative only. "
                  "Replace them with your own data; missing values must be written as null.")

_INDICATORS = [
    # id, name, rubric, polarity, kind, extra
    ("fao_focus_areas", "Declared focus areas", "FAO", "higher_better", "numeric", {"unit": "count"}),
    ("fao_evaluation_days", "Evaluation timeframe", "FAO", "lower_better", "numeric", {"unit": "days"}),
    ("fao_program_months", "Program period", "FAO", "higher_better", "numeric",
     {"unit": "months", "descriptive": True, "weight": 0.0}),
    ("pso_decision_process", "Documented decision process", "PSO", "higher_better", "ordinal",
     {"levels": ["none", "basic", "intermediate", "full"]}),
    ("pso_allocated_share", "Share of budget allocated", "PSO", "higher_better", "numeric", {"unit": "ratio"}),
    ("gov_mission_published", "Mission and vision published", "GOV", "higher_better", "boolean", {}),
    ("gov_objective_alignment", "Alignment with stated objectives", "GOV", "higher_better", "ordinal",
     {"levels": ["undefined", "partial", "explicit"]}),
    ("efi_success_criteria", "Explicit success criteria", "EFI", "higher_better", "boolean", {}),
    ("efi_milestone_rate", "Milestone completion rate", "EFI", "higher_better", "numeric", {"unit": "ratio"}),
    ("efi_impact_reports", "Published impact reports", "EFI", "higher_better", "numeric", {"unit": "count"}),
    ("tac_decisions_public", "Decisions logged publicly", "TAC", "higher_better", "boolean", {}),
    ("tac_decision_days", "Time to funding decision", "TAC", "lower_better", "numeric", {"unit": "days"}),
    ("com_applicants", "Applicant count", "COM", "higher_better", "numeric", {"unit": "count"}),
    ("com_avg_grant_usd", "Average grant size", "COM", "higher_better", "numeric", {"unit": "USD"}),
    ("com_team_size", "Program management team size", "COM", "higher_better", "numeric", {"unit": "people"}),
    ("com_budget_usd", "Total program budget", "COM", "higher_better", "numeric",
     {"unit": "USD", "descriptive": True, "weight": 0.0}),
]

_PROGRAMS = [
    ("alpha-grants", "Alpha Grants (synthetic)", "Alpha L2", "ALP"),
    ("beta-fund", "Beta Builder Fund (synthetic)", "Beta Rollup", "BET"),
    ("gamma-rounds", "Gamma Mission Rounds (synthetic)", "Gamma Chain", "GAM"),
    ("delta-incentives", "Delta Incentive Program (synthetic)", "Delta L2", "DEL"),
]

_VALUES = {
    "alpha-grants":     [6, 30, 12, "full", 0.85, True, "explicit", True, 0.72, 4, True, 21, 540, 25000.0, 9, 4200000.0],
    "beta-fund":        [3, 45, 6, "intermediate", 0.60, True, "partial", False, 0.55, 1, True, 35, 210, 40000.0, 4, 1500000.0],
    "gamma-rounds":     [4, 60, 9, "basic", 0.40, False, "partial", True, None, 2, False, 50, 380, 12000.0, 6, 2000000.0],
    "delta-incentives": [2, 90, 3, "none", 0.25, False, "undefined", False, 0.30, 0, False, 75, 95, 8000.0, 2, 500000.0],
}


def dataset_template() -> dict:
    indicators = []
    for iid, name, rubric, polarity, kind, extra in _INDICATORS:
        doc = {"id": iid, "name": f"Synthetic: {name}", "rubric": rubric, "polarity": polarity,
               "kind": kind, "weight": extra.get("weight", 1.0), "descriptive": extra.get("descriptive", False)}
        if "levels" in extra:
            doc["levels"] = extra["levels"]
        if "unit" in extra:
            doc["unit"] = extra["unit"]
        indicators.append(doc)
    programs = [{"id": pid, "name": name, "ecosystem": eco,
                 "metadata": {"token": token, "synthetic": "true"}}
                for pid, name, eco, token in _PROGRAMS]
    values = [{"program": pid, "indicator": ind[0], "value": v}
              for pid, row in _VALUES.items() for ind, v in zip(_INDICATORS, row)]
    return {"$comment": SYNTHETIC_NOTE, "programs": programs, "indicators": indicators, "values": values}


def config_template() -> dict:
    return {
        "$comment": ("Scoring configuration. mode 'equal' weights every scored indicator 1/n within its rubric "
                     "and every rubric 1/m. For mode 'explicit' add rubric_weights {RUBRIC: w} and/or "
                     "indicator_weights {RUBRIC: {indicator_id: w}}; each group is rescaled to sum to 1. "
                     "normalization: minmax | zscore | rank. missing_policy: renormalize | strict."),
        "mode": "equal",
        "normalization": "minmax",
        "missing_policy": "renormalize",
        "degenerate_value": 0.5,
    }


_SUBCATEGORIES = {
    "FAO": ["FAO.focus_areas", "FAO.strategic_goals"],
    "PSO": ["PSO.decision_process", "PSO.fund_allocation"],
    "GOV": ["GOV.structure", "GOV.funding_sources"],
    "EFI": ["EFI.success_criteria", "EFI.impact_assessment"],
    "TAC": ["TAC.reporting", "TAC.accountability"],
    "COM": ["COM.reach", "COM.incentives"],
}


def responses_template() -> list:
    panel = [
        ("evaluator-1", "Synthetic Grants DAO", [3.5, 4.0, 2.5, 3.0, 4.5, 3.0, 2.0, 2.5, 3.0, 3.5, 4.0, 3.5]),
        ("evaluator-2", "Independent (synthetic)", [4.0, 4.5, 3.0, 3.0, 4.0, 2.5, 2.5, 3.0, 2.5, 3.0, 3.5, 4.0]),
    ]
    responses = []
    for evaluator, affiliation, flat in panel:
        scores, comments, it = {}, {}, iter(flat)
        for rubric, subs in _SUBCATEGORIES.items():
            scores[rubric] = {}
            comments[rubric] = {}
            for sub in subs:
                scores[rubric][sub] = next(it)
                comments[rubric][sub] = f"Synthetic comment for {sub}."
        responses.append({
            "$comment": SYNTHETIC_NOTE,
            "evaluator_id": evaluator,
            "affiliation": affiliation,
            "scores": scores,
            "comments": comments,
            "overall_justification": "Synthetic overall justification for the template panel.",
        })
    return responses


TEMPLATES = {
    "dataset": dataset_template,
    "config": config_template,
    "responses": responses_template,
}


def template_text(kind: str) -> str:
    try:
        build = TEMPLATES[kind]
    except KeyError:
        raise ValueError(f"unknown template kind {kind!r}; choose from {', '.join(TEMPLATES)}") from None
    return json.dumps(build(), indent=2, ensure_ascii=False) + "\n"
