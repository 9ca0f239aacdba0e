# test/test_regulator.py
import gmpy2
import pytest

from regulator_factor_core.config import Settings
from regulator_factor_core.errors import RegulatorInputError
from regulator_factor_core.regulator import (RegulatorKind, accept_external, convergent_logarithm,
                                             hua_regulator_bound, regulator_traverse,
                                             walk_principal_cycle)
from regulator_factor_core.utils import real_context

CTX = real_context(96)


def test_regulator_of_21():
    value = regulator_traverse(21)
    assert value.kind is RegulatorKind.EXACT_TRAVERSAL
    assert value.is_exact
    assert value.tau == 6
    expected = CTX.log(55 + 12 * CTX.sqrt(21))
    assert abs(value.value - expected) / expected < 1e-20
    assert float(value.value) == pytest.approx(4.70048, abs=1e-3)
    assert "crosscheck:convergent" in value.notes


def test_regulator_of_2_odd_period():
    value = regulator_traverse(2)
    assert value.tau == 1
    assert float(value.value) == pytest.approx(1.76275, abs=1e-5)


def test_walk_principal_cycle_21(cycle_21):
    entries = walk_principal_cycle(21)
    assert len(entries) == 7
    assert [e.form for e in entries[:-1]] == cycle_21
    assert entries[-1].form == cycle_21[0]
    total = entries[-1].dist
    assert abs(entries[3].dist - total / 2) < 1e-20
    assert entries[0].to_dict()["form"] == ["1", "8", "-5"]


def test_walk_odd_period_has_double_length():
    entries = walk_principal_cycle(13)
    assert entries[-1].index == 10


def test_traversal_matches_convergents_in_range():
    for n in range(2, 600):
        if gmpy2.is_square(n):
            continue
        value = regulator_traverse(n)
        reference = convergent_logarithm(n, CTX)
        assert abs(value.value - reference) / reference < 1e-9, n


def test_crosscheck_can_be_skipped(capsys):
    value = regulator_traverse(21, Settings(crosscheck_max_tau=0), verbose=True)
    assert value.notes[0].startswith("crosscheck:skipped")
    assert "警告" in capsys.readouterr().err


def test_accept_external():
    value = accept_external(21, "9.40096")
    assert value.kind is RegulatorKind.EXTERNAL_MULTIPLE
    assert value.multiplier_hint is None
    assert not value.is_exact
    assert float(value.value) == pytest.approx(9.40096)
    assert accept_external(21, 4.7, exact=True).is_exact


@pytest.mark.parametrize("bad", ["abc", "-1", "0", "nan", "inf"])
def test_accept_external_rejects(bad):
    with pytest.raises(RegulatorInputError):
        accept_external(21, bad)


def test_hua_bound_dominates():
    for n in range(2, 400):
        if gmpy2.is_square(n):
            continue
        assert regulator_traverse(n).value <= hua_regulator_bound(n), n


def test_to_dict_uses_strings():
    data = regulator_traverse(21).to_dict()
    assert data["value"].startswith("4.70039")
    assert data["kind"] == "ExactTraversal"
