# regulator_factor_core/utils.py
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict

import gmpy2
import mpmath
from sympy import sieve

from .config import DEFAULT_PRECISION_BITS, DISTANCE_SIGNIFICANT_DIGITS
from .errors import EvenInputError, InvalidInputError, SquareInputError

_MPZ = type(gmpy2.mpz(0))

# 对 2^64 以下的整数，前 12 个素数作为强伪素数底已足够确定性判定
_DETERMINISTIC_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_RANDOM_WITNESS_ROUNDS = 24


def validate_radicand(n, require_odd: bool = False) -> gmpy2.mpz:
    """检查 N 为大于 1 的非平方整数，返回 mpz。"""
    if isinstance(n, bool) or not isinstance(n, (int, _MPZ)):
        raise InvalidInputError(f"N 必须是整数，收到 {type(n).__name__}。")
    n = gmpy2.mpz(n)
    if n <= 1:
        raise InvalidInputError(f"N 必须大于 1，收到 {n}。")
    if gmpy2.is_square(n):
        raise SquareInputError(int(n))
    if require_odd and n % 2 == 0:
        raise EvenInputError(int(n))
    return n


def floor_sqrt(n) -> gmpy2.mpz:
    """⌊√n⌋，n ≥ 0。"""
    return gmpy2.isqrt(gmpy2.mpz(n))


def ceil_log2(x) -> int:
    """⌈log₂ x⌉，x > 0，接受整数或实数。"""
    if x <= 0:
        raise ValueError("ceil_log2 需要正数。")
    if isinstance(x, (int, _MPZ)):
        return int(gmpy2.mpz(x - 1).bit_length()) if x > 1 else 0
    return int(mpmath.ceil(mpmath.log(mpmath.mpf(x), 2)))


def is_probable_prime(n) -> bool:
    """
    强伪素数检验。2^64 以下使用固定底集合（确定性结果），
    以上使用由 N 播种的随机底，保证同一输入结果可复现。
    """
    n = gmpy2.mpz(n)
    if n < 2:
        return False
    for p in _DETERMINISTIC_WITNESSES:
        if n == p:
            return True
        if n % p == 0:
            return False
    if n.bit_length() <= 64:
        return all(gmpy2.is_strong_prp(n, a) for a in _DETERMINISTIC_WITNESSES)

    if not all(gmpy2.is_strong_prp(n, a) for a in _DETERMINISTIC_WITNESSES):
        return False
    rng = random.Random(int(n))
    for _ in range(_RANDOM_WITNESS_ROUNDS):
        a = rng.randrange(2, int(n) - 1)
        if not gmpy2.is_strong_prp(n, a):
            return False
    return True


@dataclass
class TrialFactorization:
    """试除结果。complete 为真时 primes 给出 N 的完整素因子分解。"""
    n: int
    primes: Dict[int, int] = field(default_factory=dict)
    cofactor: int = 1
    complete: bool = True

    @property
    def distinct_primes(self):
        return sorted(self.primes)


def trial_factor(n, bound: int) -> TrialFactorization:
    """用不超过 bound 的素数试除 N。剩余余因子若可判定为素数则并入结果。"""
    n = int(n)
    remaining = n
    primes: Dict[int, int] = {}
    limit = min(int(bound), int(floor_sqrt(n)))
    for p in sieve.primerange(2, limit + 1):
        if p * p > remaining:
            break
        while remaining % p == 0:
            primes[p] = primes.get(p, 0) + 1
            remaining //= p

    if remaining > 1:
        # 余因子没有 ≤ bound 的素因子；若其小于 bound² 或通过素性检验则为素数
        if remaining <= bound * bound or is_probable_prime(remaining):
            primes[remaining] = primes.get(remaining, 0) + 1
            remaining = 1

    return TrialFactorization(n=n, primes=primes, cofactor=remaining, complete=(remaining == 1))


@lru_cache(maxsize=None)
def real_context(bits: int = DEFAULT_PRECISION_BITS) -> mpmath.MPContext:
    """返回一个独立的 mpmath 上下文，精度为 bits 位，不影响全局 mp。"""
    ctx = mpmath.MPContext()
    ctx.prec = bits
    return ctx


def format_real(x, digits: int = DISTANCE_SIGNIFICANT_DIGITS) -> str:
    """以给定有效数字位数输出实数（十进制字符串）。"""
    return mpmath.nstr(x, digits)
