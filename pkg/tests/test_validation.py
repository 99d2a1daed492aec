import dataclasses

import pytest

from epigrowth.forms import RecoverySpec
from epigrowth.validation import validate_assumptions


def test_section6_report(section6, section6_extras):
    rep = validate_assumptions(section6, section6_extras)
    failed = {c.key for c in rep.failures()}
    # gamma1 exceeds one and the Cobb-Douglas technology is not strictly jointly concave
    assert failed == {"A3.1", "A8.4b"}
    assert rep["A2.2"].status == "note"
    assert rep["A1"].status == "pass"
    assert all(c.key.startswith("X.") for c in rep.notes() if c.key.startswith("X."))


def test_failures_carry_witnesses(section6):
    rep = validate_assumptions(section6)
    assert rep["A8.4b"].witness is not None
    assert "A3.1" in rep.format()


def test_birth_below_mortality_is_reported(section6):
    rep = validate_assumptions(section6.with_params(b=0.001))
    assert rep["A1"].status == "fail"


def test_recovery_floor_fix_clears_a31(section6):
    fixed = dataclasses.replace(section6, gamma=RecoverySpec("health", 0.99, 1.0, 1.0))
    rep = validate_assumptions(fixed)
    assert rep["A3.1"].status in ("pass", "sampled-pass")


def test_missing_key_raises(section6):
    with pytest.raises(KeyError):
        validate_assumptions(section6)["nope"]
