# test/test_classify.py
import pytest
from sympy import jacobi_symbol, primerange

import regulator_factor_core.classify as classify
from regulator_factor_core.classify import (CentralVerdict, ParityVerdict, RULE_DIRICHLET_QUARTIC,
                                            RULE_JI, RULE_LEGENDRE_MINUS_ONE, RULE_NONE,
                                            RULE_P5_MOD_8_Q3_MOD_4, RULE_PRIME_3_MOD_4, RULE_SET_F,
                                            RULE_YOKOI_EVEN, eligible_radicands, jacobi,
                                            measure_central, odd_period_fraction, predict_central,
                                            predict_parity, quartic_symbol)
from regulator_factor_core.config import ALPHA_CONSTANT
from regulator_factor_core.errors import PreconditionError


def test_jacobi_matches_sympy():
    for n in range(3, 120, 2):
        for a in range(-20, 80):
            assert jacobi(a, n) == jacobi_symbol(a, n), (a, n)


def test_jacobi_worked_values():
    assert jacobi(5, 89) == 1
    assert jacobi(17, 43) == 1


@pytest.mark.parametrize("n", [1, 4, 0, -3])
def test_jacobi_precondition(n):
    with pytest.raises(PreconditionError):
        jacobi(3, n)


def _is_fourth_power(p, q):
    return any(pow(x, 4, q) == p % q for x in range(1, q))


def test_quartic_symbol_brute_force():
    primes = [p for p in primerange(5, 160) if p % 4 == 1]
    checked = 0
    for p in primes:
        for q in primes:
            if p == q or jacobi(p, q) != 1:
                continue
            expected = 1 if _is_fourth_power(p, q) else -1
            assert quartic_symbol(p, q) == expected, (p, q)
            checked += 1
    assert checked > 10


def test_quartic_worked_values():
    assert quartic_symbol(5, 29) == -1
    assert quartic_symbol(29, 5) == -1
    assert quartic_symbol(13, 53) * quartic_symbol(53, 13) == 1


@pytest.mark.parametrize("p, q", [(3, 7), (5, 5), (5, 13), (5, 21)])
def test_quartic_preconditions(p, q):
    with pytest.raises(PreconditionError):
        quartic_symbol(p, q)


@pytest.mark.parametrize("n, verdict, rule", [
    (21, ParityVerdict.EVEN, RULE_PRIME_3_MOD_4),
    (65, ParityVerdict.ODD, RULE_LEGENDRE_MINUS_ONE),
    (205, ParityVerdict.EVEN, RULE_DIRICHLET_QUARTIC),
    (145, ParityVerdict.UNKNOWN, RULE_NONE),
])
def test_predict_parity(n, verdict, rule):
    prediction = predict_parity(n)
    assert prediction.verdict is verdict
    assert prediction.rule == rule


def test_parity_predictions_never_contradict_measurement():
    for n in range(2, 1500):
        if int(n ** 0.5) ** 2 == n:
            continue
        prediction = predict_parity(n)
        if prediction.verdict is ParityVerdict.UNKNOWN:
            continue
        assert prediction.verdict is measure_central(n).parity, n


def test_known_factors_are_used():
    prediction = predict_parity(205, known_factors=[5, 41])
    assert prediction.rule == RULE_DIRICHLET_QUARTIC
    with pytest.raises(PreconditionError):
        predict_parity(205, known_factors=[7])


@pytest.mark.parametrize("n, verdict, rule", [
    (21, CentralVerdict.NONTRIVIAL_GUARANTEED, RULE_SET_F),
    (15, CentralVerdict.NONTRIVIAL_GUARANTEED, RULE_P5_MOD_8_Q3_MOD_4),
    (205, CentralVerdict.NONTRIVIAL_GUARANTEED, RULE_YOKOI_EVEN),
    (51, CentralVerdict.CENTRAL_IS_TWO, RULE_JI),
    (731, CentralVerdict.UNKNOWN, RULE_NONE),
])
def test_predict_central(n, verdict, rule):
    prediction = predict_central(n)
    assert prediction.verdict is verdict
    assert prediction.rule == rule


def test_central_prediction_factors_once(monkeypatch):
    calls = []
    real = classify.trial_factor

    def counting(n, bound):
        calls.append(n)
        return real(n, bound)

    monkeypatch.setattr(classify, "trial_factor", counting)
    prediction = predict_central(205)
    assert prediction.verdict is CentralVerdict.NONTRIVIAL_GUARANTEED
    assert prediction.rule == RULE_YOKOI_EVEN
    assert calls == [205]


def test_central_predictions_hold():
    for n in range(3, 3000, 2):
        if int(n ** 0.5) ** 2 == n:
            continue
        prediction = predict_central(n)
        measured = measure_central(n)
        if prediction.verdict is CentralVerdict.NONTRIVIAL_GUARANTEED:
            assert measured.tau % 2 == 0, n
            assert 1 < measured.central_gcd < n, n
        elif prediction.verdict is CentralVerdict.CENTRAL_IS_TWO:
            assert measured.central_q == 2, n


def test_measure_central():
    m = measure_central(21)
    assert (m.tau, m.central_q, m.central_gcd) == (6, 3, 3)
    assert m.parity is ParityVerdict.EVEN
    m = measure_central(13)
    assert (m.tau, m.central_q, m.central_gcd) == (5, 3, 1)
    assert m.to_dict()["central_q"] == "3"


def test_eligible_radicands():
    assert list(eligible_radicands(30)) == [2, 5, 10, 13, 17, 26, 29]
    assert list(eligible_radicands(100, two_primes_only=True)) == [65, 85]


def test_odd_period_fraction_small():
    stat = odd_period_fraction(30)
    assert stat.sample_size == 7
    assert stat.odd_count == 7
    assert stat.reference == pytest.approx(1 - ALPHA_CONSTANT)
    pairs = odd_period_fraction(100, two_primes_only=True)
    assert (pairs.sample_size, pairs.odd_count) == (2, 2)
    assert pairs.reference == pytest.approx(2 / 3)
