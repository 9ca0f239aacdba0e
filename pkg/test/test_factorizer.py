# test/test_factorizer.py
import math
from functools import lru_cache

import pytest
from sympy import factorint

from regulator_factor_core.config import Settings
from regulator_factor_core.errors import (CycleTooShortError, EvenInputError, InvalidInputError,
                                          OutOfEnvelopeError, ProbablePrimeError, SoundnessError,
                                          SquareInputError)
from regulator_factor_core.factorizer import (ALGORITHM_1, ALGORITHM_2, RESOLVE_MULTIPLE,
                                              FactorOutcome, FactorTrace, OutcomeKind,
                                              RegulatorFactorizer, _factor_outcome, factor)
from regulator_factor_core.qform import giant_step
from regulator_factor_core.regulator import accept_external, regulator_traverse
from regulator_factor_core.utils import ceil_log2


@lru_cache(maxsize=None)
def large_regulator_cases(limit=3):
    """p ≡ q ≡ 3 (mod 4) 的半素数中 R⁺ > (ln N)² 的前几个。"""
    cases = []
    for n in range(20001, 60000, 4):
        primes = factorint(n)
        if len(primes) != 2 or any(e != 1 or p % 4 != 3 for p, e in primes.items()):
            continue
        regulator = regulator_traverse(n)
        if regulator.value > math.log(n) ** 2:
            cases.append((n, regulator))
            if len(cases) == limit:
                break
    return tuple(cases)


@pytest.mark.parametrize("n, divisor, iterations", [(21, 3, 3), (15, 3, 1), (689, 13, 1), (11021, 103, 3)])
def test_small_regulator_scan(n, divisor, iterations):
    outcome = factor(n)
    assert outcome.kind is OutcomeKind.FACTOR
    assert outcome.divisor == divisor
    assert outcome.trace.algorithm == ALGORITHM_1
    assert outcome.trace.iterations == iterations
    assert f"gcd(Q_{iterations}, N) = {divisor}" in outcome.trace.notes


@pytest.mark.parametrize("n", [65, 731])
def test_inapplicable(n):
    outcome = factor(n)
    assert outcome.kind is OutcomeKind.INAPPLICABLE
    assert outcome.divisor is None
    assert not outcome.is_factor


@pytest.mark.parametrize("n, error", [(9, SquareInputError), (101, ProbablePrimeError),
                                      (22, EvenInputError), (1, InvalidInputError)])
def test_rejected_inputs(n, error):
    with pytest.raises(error):
        factor(n)


def test_error_messages():
    with pytest.raises(ValueError, match="perfect square"):
        factor(9)
    with pytest.raises(ValueError, match="probable prime"):
        factor(101)


def test_bounds_for_21():
    factorizer = RegulatorFactorizer()
    r = regulator_traverse(21).value
    assert factorizer.i_max(21, r) == 11
    assert factorizer.psi(21, r) == 170


def test_imax_override():
    outcome = factor(21, Settings(imax_override=2))
    assert outcome.kind is OutcomeKind.INAPPLICABLE
    assert outcome.trace.i_max == 2


def test_out_of_envelope_needs_external_regulator():
    settings = Settings(max_traversal_bits=4)
    with pytest.raises(OutOfEnvelopeError):
        factor(21, settings)
    given = accept_external(21, "4.70039771", exact=True)
    assert factor(21, settings, regulator=given).divisor == 3


def test_base_form_needs_long_cycle():
    with pytest.raises(CycleTooShortError):
        RegulatorFactorizer().build_base_form(21)


def test_short_cycle_falls_back_to_scan():
    # R' 超过 (ln 21)² 但主循环本身太短，算法 2 无法建立基准型
    outcome = factor(21, regulator=accept_external(21, "12.5", exact=True))
    assert outcome.divisor == 3
    assert outcome.trace.algorithm == ALGORITHM_1
    assert any(note.startswith("fallback to algorithm1") for note in outcome.trace.notes)


def test_soundness_guard():
    with pytest.raises(SoundnessError):
        _factor_outcome(21, 5, FactorTrace())
    with pytest.raises(SoundnessError):
        _factor_outcome(21, 21, FactorTrace())


def test_large_regulator_cases_exist():
    assert len(large_regulator_cases()) >= 1


def test_base_form_distance_window():
    factorizer = RegulatorFactorizer()
    for n, _ in large_regulator_cases():
        base = factorizer.build_base_form(n)
        assert base.dist >= 2 * math.log(4 * n) + 1
        assert base.dist <= 4 * math.log(n)


def test_giant_step_algorithm():
    for n, regulator in large_regulator_cases():
        outcome = factor(n, regulator=regulator)
        assert outcome.is_factor, n
        assert outcome.trace.algorithm == ALGORITHM_2
        assert n % outcome.divisor == 0
        assert outcome.trace.branches[-1].found
        for branch in outcome.trace.branches:
            assert branch.steps_used <= branch.psi, (n, branch.j)
            assert branch.t <= branch.t_bound, (n, branch.j)
            assert float(branch.approximation_error) <= float(branch.approximation_bound) + 1e-6


def test_repeated_squaring_distance_grows():
    factorizer = RegulatorFactorizer()
    for n, _ in large_regulator_cases():
        slack = 2 * math.log(4 * n)
        g = factorizer.build_base_form(n)
        assert float(g.dist) >= 1 + slack
        for i in range(1, 5):
            g = giant_step(g, g, factorizer.ctx)
            assert float(g.dist) > 2 ** i + slack, (n, i)


def test_giant_step_algorithm_direct_call():
    n, regulator = large_regulator_cases()[0]
    outcome = RegulatorFactorizer().algorithm2(n, regulator)
    assert outcome.is_factor
    assert outcome.trace.base_steps > 0
    assert outcome.trace.branches[0].j == 1


@pytest.mark.parametrize("k", [1, 2, 3, 4, 8])
def test_resolve_unknown_multiple(k):
    for n, regulator in large_regulator_cases():
        multiple = accept_external(n, regulator.value * k)
        outcome = factor(n, regulator=multiple)
        assert outcome.is_factor, (n, k)
        assert outcome.trace.algorithm == RESOLVE_MULTIPLE
        assert outcome.trace.halving_rounds <= ceil_log2(k) + 1
        for branch in outcome.trace.branches:
            assert branch.steps_used <= branch.psi, (n, k, branch.j)
            assert branch.t <= branch.t_bound, (n, k, branch.j)


def test_resolve_small_multiple_uses_scan():
    outcome = RegulatorFactorizer().resolve_multiple(21, accept_external(21, "4.70039771"))
    assert outcome.divisor == 3
    assert outcome.trace.algorithm == RESOLVE_MULTIPLE
    assert outcome.trace.halving_rounds == 0
    assert outcome.trace.branches == []


def test_short_cycle_multiple_falls_back_to_scan():
    outcome = factor(21, regulator=accept_external(21, "9.40079542"))
    assert outcome.divisor == 3
    assert outcome.trace.algorithm == ALGORITHM_1


def test_outcome_dict_roundtrip():
    outcome = factor(21)
    data = outcome.to_dict()
    assert data["divisor"] == "3" and data["cofactor"] == "7"
    assert FactorOutcome.from_dict(data) == outcome


def test_verbose_goes_to_stderr(capsys):
    factor(21, verbose=True)
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "算法 1" in captured.err


def test_composite_gcd_is_reduced_to_prime():
    outcome = factor(15725)
    assert outcome.is_factor
    assert outcome.divisor == 5
    assert outcome.trace.algorithm == ALGORITHM_1
    assert outcome.trace.iterations == 1
    assert "gcd(Q_1, N) = 25" in outcome.trace.notes
    assert "divisor 25 reduced to prime factor 5" in outcome.trace.notes


def test_factor_outcome_keeps_prime_divisor():
    trace = FactorTrace()
    assert _factor_outcome(15725, 37, trace).divisor == 37
    assert trace.notes == []
    assert _factor_outcome(15725, 425, trace).divisor == 5
    assert trace.notes == ["divisor 425 reduced to prime factor 5"]
