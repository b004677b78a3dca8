"""Smoke test for the epk_repair extension module."""

import epk_repair as er

RULES = """\
key: trial
determined: double_blind, open, control
rule: double_blind = 'yes' & open = 'yes'
rule: double_blind = 'no' & open = 'no'
rule: control = 'no' & placebo = 'yes'
"""

dirty = er.Table(
    ["trial", "double_blind", "open", "control", "placebo"],
    [
        ["t1", "yes", "no", "no", "no"],
        ["t1", "yes", "yes", "no", "yes"],
        ["t1", "yes", "no", "no", "no"],
        ["t2", "no", "yes", "yes", "yes"],
        ["t2", None, "yes", "no", "yes"],
    ],
)

before = er.check(dirty, RULES)
assert before["rule_violations"] == 3, before
assert before["fd_violations"] == 2, before

result = er.repair(dirty, RULES, seed=7, oracle_verify=True)
assert result.total_cost == 4, result
after = er.check(result.table, RULES)
assert after["rule_violations"] == 0 and after["fd_violations"] == 0, after
report = result.report
assert [c["key"] for c in report["per_class"]] == [["t1"], ["t2"]]
assert all(c.get("verified", True) for c in report["per_class"])
assert er.repair(dirty, RULES, seed=7).table == result.table

prefs = {"open": [("no", "yes", 5), ("yes", "no", 1)]}
weighted = er.repair(dirty, RULES, cost="preference", preferences=prefs, closed_domains=True)
assert weighted.report["config"]["cost"] == "preference"

assert er.minimal_covers([[0, 1], [1, 2]]) == [[1], [0, 2]]
assert len(er.sufficient_set(dirty, RULES)) >= 3

noisy, gold, rules = er.synthesize(rows=2000, classes=200, seed=1)
fixed = er.repair(noisy, rules)
metrics = er.evaluate(noisy, fixed.table, gold)
assert 0.0 < metrics["precision"] <= 1.0 and 0.0 < metrics["recall"] <= 1.0, metrics
assert er.check(fixed.table, rules)["rule_violations"] == 0

try:
    er.repair(dirty, "key: trial\ndetermined: open\nrule: open = 'yes'\nrule: open = 'no'\n", closed_domains=True)
except er.UnsatisfiableError:
    pass
else:
    raise AssertionError("contradictory rules were accepted")

try:
    er.repair(dirty, RULES, cost="nope")
except er.EpkError:
    pass
else:
    raise AssertionError("unknown cost model was accepted")

print("smoke test passed:", result, metrics["f1"])
