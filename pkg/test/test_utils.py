# test/test_utils.py
import gmpy2
import mpmath
import pytest
from sympy import factorint, isprime

from regulator_factor_core.errors import EvenInputError, InvalidInputError, SquareInputError
from regulator_factor_core.utils import (ceil_log2, floor_sqrt, format_real, is_probable_prime, real_context,
                                         trial_factor, validate_radicand)


@pytest.mark.parametrize("bad", [0, 1, -7, True, 2.5, "15"])
def test_validate_rejects_non_radicands(bad):
    with pytest.raises(InvalidInputError):
        validate_radicand(bad)


def test_validate_square_and_even():
    with pytest.raises(SquareInputError, match="perfect square"):
        validate_radicand(9)
    with pytest.raises(EvenInputError, match="even input"):
        validate_radicand(22, require_odd=True)
    assert validate_radicand(22) == 22
    assert isinstance(validate_radicand(21), type(gmpy2.mpz(0)))


def test_errors_are_value_errors():
    with pytest.raises(ValueError):
        validate_radicand(16)


def test_primality_matches_sympy():
    for n in range(0, 3000):
        assert is_probable_prime(n) == isprime(n), n


def test_primality_large():
    assert is_probable_prime(2**89 - 1)
    assert not is_probable_prime(2**67 - 1)
    assert not is_probable_prime((2**61 - 1) * (2**31 - 1))


def test_trial_factor_matches_factorint():
    for n in range(2, 2000):
        found = trial_factor(n, 50)
        assert found.complete
        assert found.primes == factorint(n), n


def test_trial_factor_incomplete():
    n = (2**31 - 1) * (2**61 - 1)
    found = trial_factor(n, 1000)
    assert not found.complete
    assert found.cofactor == n


@pytest.mark.parametrize("n, root", [(0, 0), (1, 1), (84, 9), (15725, 125), (10 ** 40 + 1, 10 ** 20)])
def test_floor_sqrt(n, root):
    assert floor_sqrt(n) == root
    assert root * root <= n < (root + 1) ** 2


@pytest.mark.parametrize("x, expected", [(1, 0), (2, 1), (3, 2), (4, 2), (5, 3), (1024, 10)])
def test_ceil_log2_integers(x, expected):
    assert ceil_log2(x) == expected


def test_ceil_log2_reals():
    assert ceil_log2(mpmath.mpf("4.70048")) == 3
    assert ceil_log2(mpmath.mpf("0.5")) == -1


def test_real_context_is_isolated():
    ctx = real_context(128)
    assert ctx.prec == 128
    assert real_context(128) is ctx
    assert mpmath.mp.prec == 53


def test_format_real_digits():
    ctx = real_context(96)
    assert format_real(ctx.log(ctx.mpf(110))) == "4.70048036579"
    assert format_real(ctx.mpf(2), 3) == "2.0"
