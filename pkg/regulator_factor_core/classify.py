# regulator_factor_core/classify.py
"""
不展开连分数，仅凭同余条件与剩余符号预测周期 τ 的奇偶性以及中心项 Q_{τ/2} 是否平凡。

预测与测量分开：predict_* 只做同余与符号判断；measure_central 展开半个周期给出真实值，
供 verify 模式与测试对照。
"""
import sys
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence

import gmpy2
import numpy as np
from tqdm import tqdm

from .cf_engine import period_parity
from .config import ALPHA_CONSTANT, Settings
from .errors import PreconditionError
from .utils import is_probable_prime, trial_factor, validate_radicand


class ParityVerdict(Enum):
    EVEN = "Even"
    ODD = "Odd"
    UNKNOWN = "Unknown"


class CentralVerdict(Enum):
    NONTRIVIAL_GUARANTEED = "NontrivialGuaranteed"
    CENTRAL_IS_TWO = "CentralIsTwo"
    UNKNOWN = "Unknown"


# --- 规则来源标签 ---
RULE_PRIME_3_MOD_4 = "prime_3_mod_4_divisor"
RULE_LEGENDRE_MINUS_ONE = "pq_legendre_minus_one"
RULE_DIRICHLET_QUARTIC = "pq_dirichlet_quartic"
RULE_SET_F = "set_F_membership"
RULE_P5_MOD_8_Q3_MOD_4 = "p5mod8_q3mod4"
RULE_YOKOI_EVEN = "n1mod4_even_period"
RULE_JI = "ji_p1mod8_q3mod4"
RULE_NONE = "none"


@dataclass(frozen=True)
class ParityPrediction:
    verdict: ParityVerdict
    rule: str

    def to_dict(self) -> dict:
        return {"verdict": self.verdict.value, "rule": self.rule}


@dataclass(frozen=True)
class CentralPrediction:
    verdict: CentralVerdict
    rule: str

    def to_dict(self) -> dict:
        return {"verdict": self.verdict.value, "rule": self.rule}


@dataclass(frozen=True)
class CentralMeasurement:
    """半周期扫描得到的真实值：τ、中心项 (Q_{τ/2} 或 Q_{(τ+1)/2}) 及其与 N 的最大公约数。"""
    n: int
    tau: int
    central_q: int
    central_gcd: int

    @property
    def parity(self) -> ParityVerdict:
        return ParityVerdict.EVEN if self.tau % 2 == 0 else ParityVerdict.ODD

    def to_dict(self) -> dict:
        return {"tau": self.tau, "parity": self.parity.value,
                "central_q": str(self.central_q), "central_gcd": str(self.central_gcd)}


def jacobi(a, n) -> int:
    """Jacobi 符号 (a/n)，按二次互反律迭代计算。n 必须是不小于 3 的奇数。"""
    a, n = int(a), int(n)
    if n < 3 or n % 2 == 0:
        raise PreconditionError(f"Jacobi 符号要求 n 为不小于 3 的奇数，收到 {n}。")
    acc = 1
    while True:
        a %= n
        if a == 0:
            return 0
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                acc = -acc
        if a == 1:
            return acc
        if a % 4 == 3 and n % 4 == 3:
            acc = -acc
        a, n = n, a


def quartic_symbol(p, q) -> int:
    """
    (p/q)₄ = p^{(q−1)/4} mod q，映射到 ±1。
    要求 p、q 为互异素数，均 ≡ 1 (mod 4)，且 (p/q) = 1。
    """
    p, q = int(p), int(q)
    if p == q or not (is_probable_prime(p) and is_probable_prime(q)):
        raise PreconditionError(f"({p}/{q})₄ 要求两个互异素数。")
    if p % 4 != 1 or q % 4 != 1:
        raise PreconditionError(f"({p}/{q})₄ 要求 p ≡ q ≡ 1 (mod 4)。")
    if jacobi(p, q) != 1:
        raise PreconditionError(f"({p}/{q})₄ 要求 ({p}/{q}) = 1。")
    value = pow(p, (q - 1) // 4, q)
    if value == 1:
        return 1
    if value == q - 1:
        return -1
    raise PreconditionError(f"{p}^((q−1)/4) mod {q} = {value} 不是 ±1。")


def _prime_divisors(n: int, known_factors: Optional[Sequence[int]],
                    settings: Settings):
    """
    返回 (已知素因子集合, 是否为完整分解, 完整分解时的指数表)。
    known_factors 给出时只采信其中确实整除 N 的素数。
    """
    if known_factors:
        primes = [int(p) for p in known_factors]
        for p in primes:
            if not is_probable_prime(p) or n % p:
                raise PreconditionError(f"{p} 不是 {n} 的素因子。")
        exponents = {}
        rest = n
        for p in set(primes):
            while rest % p == 0:
                exponents[p] = exponents.get(p, 0) + 1
                rest //= p
        return set(primes), rest == 1, exponents
    found = trial_factor(n, settings.trial_division_bound)
    return set(found.primes), found.complete, dict(found.primes)


def _as_two_primes(exponents: dict, complete: bool):
    """N = pq（p < q，互异素数）时返回 (p, q)，否则返回 None。"""
    if not complete or len(exponents) != 2 or any(e != 1 for e in exponents.values()):
        return None
    p, q = sorted(exponents)
    return p, q


def _parity_from_divisors(primes, complete: bool, exponents: dict) -> ParityPrediction:
    if any(p % 4 == 3 for p in primes):
        return ParityPrediction(ParityVerdict.EVEN, RULE_PRIME_3_MOD_4)

    pair = _as_two_primes(exponents, complete)
    if pair is not None and pair[0] % 4 == 1 and pair[1] % 4 == 1:
        p, q = pair
        if jacobi(p, q) == -1:
            return ParityPrediction(ParityVerdict.ODD, RULE_LEGENDRE_MINUS_ONE)
        if quartic_symbol(p, q) * quartic_symbol(q, p) == -1:
            return ParityPrediction(ParityVerdict.EVEN, RULE_DIRICHLET_QUARTIC)

    return ParityPrediction(ParityVerdict.UNKNOWN, RULE_NONE)


def predict_parity(n, known_factors: Optional[Sequence[int]] = None,
                   settings: Optional[Settings] = None) -> ParityPrediction:
    """
    依次检查：
    1. N 有 ≡ 3 (mod 4) 的素因子 ⇒ τ 偶；
    2. N = pq，p ≡ q ≡ 1 (mod 4)，(p/q) = −1 ⇒ τ 奇；
    3. 同上且 (p/q) = 1，(p/q)₄(q/p)₄ = −1 ⇒ τ 偶；
    其余情况为 Unknown。
    """
    settings = settings or Settings()
    n = int(validate_radicand(n))
    return _parity_from_divisors(*_prime_divisors(n, known_factors, settings))


def predict_central(n, known_factors: Optional[Sequence[int]] = None,
                    settings: Optional[Settings] = None) -> CentralPrediction:
    """
    中心项预测，对应 RSA 模数情形的汇总表：
    - N ∈ 𝓕（N ≡ 1 (mod 4) 且有 ≡ 3 (mod 4) 的素因子）⇒ 非平凡；
    - 有素因子 p ≡ 5 (mod 8) 与 q ≡ 3 (mod 4) ⇒ 非平凡；
    - N ≡ 1 (mod 4) 且奇偶性预测为偶 ⇒ X² − NY² = ±2 无解，中心项非平凡；
    - N = pq，p ≡ 1 (mod 8)，q ≡ 3 (mod 4)，(p/q) = −1 ⇒ Q_{τ/2} = 2。
    """
    settings = settings or Settings()
    n = int(validate_radicand(n))
    primes, complete, exponents = _prime_divisors(n, known_factors, settings)
    has_3_mod_4 = any(p % 4 == 3 for p in primes)

    if n % 4 == 1 and has_3_mod_4:
        return CentralPrediction(CentralVerdict.NONTRIVIAL_GUARANTEED, RULE_SET_F)
    if has_3_mod_4 and any(p % 8 == 5 for p in primes):
        return CentralPrediction(CentralVerdict.NONTRIVIAL_GUARANTEED, RULE_P5_MOD_8_Q3_MOD_4)
    if n % 4 == 1:
        parity = _parity_from_divisors(primes, complete, exponents)
        if parity.verdict is ParityVerdict.EVEN:
            return CentralPrediction(CentralVerdict.NONTRIVIAL_GUARANTEED, RULE_YOKOI_EVEN)

    pair = _as_two_primes(exponents, complete)
    if pair is not None:
        p, q = pair if pair[0] % 8 == 1 else pair[::-1]
        if p % 8 == 1 and q % 4 == 3 and jacobi(p, q) == -1:
            return CentralPrediction(CentralVerdict.CENTRAL_IS_TWO, RULE_JI)

    return CentralPrediction(CentralVerdict.UNKNOWN, RULE_NONE)


def measure_central(n, settings: Optional[Settings] = None) -> CentralMeasurement:
    """verify 模式：展开半个周期，给出真实的 τ 与中心项。"""
    settings = settings or Settings()
    scan = period_parity(n, settings.step_cap)
    return CentralMeasurement(n=scan.n, tau=scan.tau, central_q=scan.central_q,
                              central_gcd=int(gmpy2.gcd(scan.central_q, scan.n)))


# --- 密度统计 ---

@dataclass(frozen=True)
class DensityStatistic:
    limit: int
    sample_size: int
    odd_count: int
    reference: float

    @property
    def fraction(self) -> float:
        return self.odd_count / self.sample_size if self.sample_size else float("nan")

    def to_dict(self) -> dict:
        return {"limit": self.limit, "sample_size": self.sample_size, "odd_count": self.odd_count,
                "fraction": self.fraction, "reference": self.reference}


def _smallest_prime_factors(limit: int) -> np.ndarray:
    spf = np.zeros(limit + 1, dtype=np.int64)
    for p in range(2, int(limit ** 0.5) + 1):
        if spf[p] == 0:
            block = spf[p * p::p]
            block[block == 0] = p
    rest = np.nonzero(spf == 0)[0]
    spf[rest] = rest
    return spf


def eligible_radicands(limit: int, two_primes_only: bool = False) -> Iterable[int]:
    """无平方因子、不含 ≡ 3 (mod 4) 素因子的 1 < N ≤ limit；two_primes_only 时只取 p ≡ q ≡ 1 (mod 4) 的 pq。"""
    spf = _smallest_prime_factors(limit)
    for n in range(2, limit + 1):
        rest, primes, ok = n, [], True
        while rest > 1:
            p = int(spf[rest])
            rest //= p
            if rest % p == 0 or p % 4 == 3:
                ok = False
                break
            primes.append(p)
        if not ok:
            continue
        if two_primes_only and (len(primes) != 2 or 2 in primes):
            continue
        yield n


def odd_period_fraction(limit: int, two_primes_only: bool = False,
                        settings: Optional[Settings] = None,
                        progress: bool = False) -> DensityStatistic:
    """
    统计满足条件的 N ≤ limit 中 τ 为奇数的比例，参考值为 1 − α（two_primes_only 时为 2/3）。
    收敛很慢，仅作参考。
    """
    settings = settings or Settings()
    sample = list(eligible_radicands(limit, two_primes_only))
    odd = 0
    for n in tqdm(sample, desc="周期奇偶统计", disable=not progress, file=sys.stderr):
        if not period_parity(n, settings.step_cap).is_even:
            odd += 1
    reference = 2 / 3 if two_primes_only else 1 - ALPHA_CONSTANT
    return DensityStatistic(limit=limit, sample_size=len(sample), odd_count=odd,
                            reference=reference)
