# regulator_factor_core/cf_engine.py
"""
√N 的周期连分数展开。

记号：α_m = (P_m + √N)/Q_m，a_m = ⌊α_m⌋，P_{m+1} = a_m Q_m − P_m，
Q_{m+1} = (N − P_{m+1}²)/Q_m。收敛子 p_m/q_m 满足 p_m = a_m p_{m−1} + p_{m−2}。
所有计算都是精确整数运算，不使用浮点数。
"""
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterator, List, Optional, Tuple

import gmpy2

from .config import KRAITCHIK_CONSTANT
from .errors import (DegenerateFormError, EvenPeriodError, InvalidInputError,
                     SquareInputError, StepCapExceededError)
from .utils import floor_sqrt, validate_radicand


@dataclass(frozen=True)
class QuadIrrState:
    """二次无理数 (P + √N)/Q 的状态，index 为下标 m。"""
    n: int
    p_coef: int
    q_coef: int
    index: int = 0

    def __post_init__(self):
        if self.q_coef == 0:
            raise DegenerateFormError("Q_m 不能为 0。")
        if (self.n - self.p_coef * self.p_coef) % self.q_coef != 0:
            raise InvalidInputError(
                f"Q={self.q_coef} 不整除 N − P² = {self.n - self.p_coef * self.p_coef}。")

    @classmethod
    def start(cls, n) -> "QuadIrrState":
        """√N 的起始状态 (P₀, Q₀) = (0, 1)。"""
        n = validate_radicand(n)
        return cls(n=int(n), p_coef=0, q_coef=1, index=0)


@lru_cache(maxsize=256)
def _root_of_nonsquare(n: int) -> int:
    if gmpy2.is_square(n):
        raise SquareInputError(n)
    return int(floor_sqrt(n))


def cf_step(state: QuadIrrState) -> Tuple[int, QuadIrrState]:
    """执行一步展开，返回 (a_m, 下一状态)。"""
    n, p, q = state.n, state.p_coef, state.q_coef
    s = _root_of_nonsquare(n)
    # (P + √N)/Q 不是整数，Q < 0 时 ⌊x⌋ = −⌊(P+s)/|Q|⌋ − 1
    if q > 0:
        a = (p + s) // q
    else:
        a = (p + s + 1) // q
    p_next = a * q - p
    q_next, rem = divmod(n - p_next * p_next, q)
    if rem:
        raise InvalidInputError(f"状态 (P={p}, Q={q}) 不满足整除条件。")
    return a, QuadIrrState(n=n, p_coef=p_next, q_coef=q_next, index=state.index + 1)


def iter_states(n, start: Optional[QuadIrrState] = None) -> Iterator[Tuple[int, QuadIrrState]]:
    """
    可续接的状态流：依次产出 (a_m, state_m)，m = 0, 1, 2, ...
    传入 start 即可从任意已知状态继续。
    """
    state = start if start is not None else QuadIrrState.start(n)
    while True:
        a, nxt = cf_step(state)
        yield a, state
        state = nxt


@dataclass(frozen=True)
class Convergent:
    p: int
    q: int
    index: int

    def norm(self, n) -> int:
        return self.p * self.p - n * self.q * self.q


def iter_convergents(n, seed: Optional[Tuple[QuadIrrState, Convergent, Convergent]] = None
                     ) -> Iterator[Convergent]:
    """
    收敛子流，从 m = −1 的 (1, 0) 开始。
    seed = (state_m, 𝔠_{m−2}, 𝔠_{m−1}) 时从 𝔠_m 续接，不再重复已产出的项。
    """
    if seed is None:
        state, prev, cur = None, Convergent(0, 1, -2), Convergent(1, 0, -1)
        yield cur
    else:
        state, prev, cur = seed
        if state.n != int(n) or not (state.index == cur.index + 1 == prev.index + 2):
            raise InvalidInputError(
                f"续接点不一致: state_{state.index}，𝔠_{prev.index}，𝔠_{cur.index}。")
    for a, st in iter_states(n, start=state):
        prev, cur = cur, Convergent(a * cur.p + prev.p, a * cur.q + prev.q, st.index)
        yield cur


def default_step_cap(n) -> int:
    """Kraitchik 上界 ⌈0.72·√N·ln N⌉ + 2；N ≤ 7 时该上界不适用，取一个小常数。"""
    n = int(n)
    bound = math.ceil(KRAITCHIK_CONSTANT * math.sqrt(n) * math.log(n)) + 2
    return max(bound, 16)


@dataclass(frozen=True)
class Expansion:
    """
    √N = [a₀; a₁, …, a_τ] 的一个完整周期。
    p_coefs、q_coefs 分别保存 P₀…P_τ 与 Q₀…Q_τ（P₀ = 0 仅为便利值）。
    """
    n: int
    a0: int
    period_quotients: Tuple[int, ...]
    tau: int
    p_coefs: Tuple[int, ...]
    q_coefs: Tuple[int, ...]

    @property
    def is_even(self) -> bool:
        return self.tau % 2 == 0

    @property
    def cycle_length(self) -> int:
        """二次型序列 𝚼 的周期：τ（偶）或 2τ（奇）。"""
        return self.tau if self.is_even else 2 * self.tau

    def quotient(self, m: int) -> int:
        if m < 0:
            raise IndexError("部分商下标从 0 开始。")
        if m == 0:
            return self.a0
        return self.period_quotients[(m - 1) % self.tau]

    def P(self, m: int) -> int:
        if m == 0:
            return 0
        return self.p_coefs[(m - 1) % self.tau + 1]

    def Q(self, m: int) -> int:
        return self.q_coefs[m % self.tau]

    @cached_property
    def convergents_head(self) -> Tuple[Convergent, ...]:
        """前 2τ+1 个收敛子（下标 −1 … 2τ−1）。"""
        return tuple(self.convergents_upto(2 * self.tau - 1))

    def convergents_upto(self, m_max: int) -> List[Convergent]:
        result = [Convergent(1, 0, -1)]
        p_prev, q_prev, p, q = 1, 0, self.a0, 1
        if m_max >= 0:
            result.append(Convergent(p, q, 0))
        for m in range(1, m_max + 1):
            a = self.quotient(m)
            p, p_prev = a * p + p_prev, p
            q, q_prev = a * q + q_prev, q
            result.append(Convergent(p, q, m))
        return result

    def convergent(self, m: int) -> Convergent:
        """单个收敛子；未缓存时流式计算，不保存中间项。"""
        if m < -1:
            raise IndexError("收敛子下标从 −1 开始。")
        head = self.__dict__.get("convergents_head")
        if head is not None and m + 1 < len(head):
            return head[m + 1]
        if m == -1:
            return Convergent(1, 0, -1)
        p_prev, q_prev, p, q = 1, 0, self.a0, 1
        for k in range(1, m + 1):
            a = self.quotient(k)
            p, p_prev = a * p + p_prev, p
            q, q_prev = a * q + q_prev, q
        return Convergent(p, q, m)


def expand_sqrt(n, step_cap: Optional[int] = None) -> Expansion:
    """
    展开 √N，直到 m ≥ 1 时首次出现 Q_m = 1，此时 τ = m。
    超过 step_cap 步仍未闭合时抛出 StepCapExceededError。
    """
    n = int(validate_radicand(n))
    cap = step_cap if step_cap is not None else default_step_cap(n)

    quotients, p_coefs, q_coefs = [], [0], [1]
    a0 = None
    for a, state in iter_states(n):
        if state.index == 0:
            a0 = a
            continue
        if state.index > cap:
            raise StepCapExceededError(n, cap)
        p_coefs.append(state.p_coef)
        q_coefs.append(state.q_coef)
        if state.q_coef == 1:
            break
        quotients.append(a)

    # 周期最后一项 a_τ = 2a₀
    quotients.append(2 * a0)
    tau = len(quotients)
    return Expansion(n=n, a0=a0, period_quotients=tuple(quotients), tau=tau,
                     p_coefs=tuple(p_coefs), q_coefs=tuple(q_coefs))


def convergents(n, count: int) -> List[Convergent]:
    """返回 count 个收敛子，第一个为 m = −1 的 (1, 0)。"""
    if count < 0:
        raise InvalidInputError("count 不能为负数。")
    result = []
    for conv in iter_convergents(n):
        if len(result) >= count:
            break
        result.append(conv)
    return result


def sum_two_squares(n, step_cap: Optional[int] = None) -> Tuple[int, int]:
    """τ 为奇数时返回 (Q_{(τ+1)/2}, P_{(τ+1)/2})，二者平方和等于 N。只展开半个周期。"""
    scan = period_parity(n, step_cap)
    if scan.is_even:
        raise EvenPeriodError(f"√{n} 的周期 τ = {scan.tau} 为偶数 (even period)。")
    a, b = scan.central_q, scan.central_p
    assert a * a + b * b == scan.n
    return a, b


def pell_fundamental_solution(exp) -> Convergent:
    """X² − NY² = 1 的最小正解：偶周期取 𝔠_{τ−1}，奇周期取 𝔠_{2τ−1}。可直接传入 N。"""
    if not isinstance(exp, Expansion):
        exp = expand_sqrt(exp)
    return exp.convergents_head[exp.cycle_length]


@dataclass(frozen=True)
class HalfPeriodScan:
    """只展开半个周期得到的结果。central_q 为 Q_{τ/2}（偶）或 Q_{(τ+1)/2}（奇）。"""
    n: int
    tau: int
    central_q: int
    central_p: int

    @property
    def is_even(self) -> bool:
        return self.tau % 2 == 0


def period_parity(n, step_cap: Optional[int] = None) -> HalfPeriodScan:
    """
    利用周期内的对称性提前终止：首次出现 P_{m+1} = P_m (m ≥ 1) 时 τ = 2m，
    首次出现 Q_{m+1} = Q_m 时 τ = 2m + 1。
    """
    n = int(validate_radicand(n))
    cap = step_cap if step_cap is not None else default_step_cap(n)
    prev = None
    for _, state in iter_states(n):
        m = state.index
        if m > cap:
            raise StepCapExceededError(n, cap)
        if prev is not None:
            if prev.index >= 1 and state.p_coef == prev.p_coef:
                return HalfPeriodScan(n=n, tau=2 * prev.index, central_q=prev.q_coef,
                                      central_p=prev.p_coef)
            if state.q_coef == prev.q_coef:
                return HalfPeriodScan(n=n, tau=2 * prev.index + 1, central_q=state.q_coef,
                                      central_p=state.p_coef)
        prev = state


@dataclass(frozen=True)
class QuadraticInteger:
    """ℤ[√N] 中的元素 x + y√N。"""
    x: int
    y: int
    n: int

    @classmethod
    def of(cls, conv: Convergent, n) -> "QuadraticInteger":
        return cls(conv.p, conv.q, n)

    def _check(self, other):
        if self.n != other.n:
            raise InvalidInputError("不同的 ℤ[√N] 元素不能运算。")

    def __add__(self, other):
        if isinstance(other, int):
            return QuadraticInteger(self.x + other, self.y, self.n)
        self._check(other)
        return QuadraticInteger(self.x + other.x, self.y + other.y, self.n)

    def __neg__(self):
        return QuadraticInteger(-self.x, -self.y, self.n)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return QuadraticInteger(self.x * other, self.y * other, self.n)
        self._check(other)
        return QuadraticInteger(self.x * other.x + self.n * self.y * other.y,
                                self.x * other.y + self.y * other.x, self.n)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        result = QuadraticInteger(1, 0, self.n)
        base = self
        while k > 0:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conjugate(self):
        return QuadraticInteger(self.x, -self.y, self.n)

    def norm(self) -> int:
        return self.x * self.x - self.n * self.y * self.y


def check_identities(exp: Expansion, max_k: int = 3) -> List[str]:
    """
    逐条检查展开满足的恒等式与不等式，返回违例描述列表（空列表表示全部成立）。
    全部比较都在整数或 ℤ[√N] 中精确进行。
    """
    n, tau = exp.n, exp.tau
    violations = []
    conv = exp.convergents_upto((max_k + 1) * tau)

    def c(m):
        return conv[m + 1]

    def lift(m):
        return QuadraticInteger.of(c(m), n)

    # 周期形状
    if exp.period_quotients[-1] != 2 * exp.a0:
        violations.append("a_τ ≠ 2a₀")
    inner = exp.period_quotients[:-1]
    if inner != inner[::-1]:
        violations.append("(a₁…a_{τ−1}) 不是回文")
    if n > 7 and tau > math.ceil(KRAITCHIK_CONSTANT * math.sqrt(n) * math.log(n)):
        violations.append("τ 超过 Kraitchik 上界")

    # 系数范围
    for m in range(1, tau + 1):
        p_m, q_m = exp.P(m), exp.Q(m)
        if not (0 <= p_m and p_m * p_m < n):
            violations.append(f"P_{m} 越界")
        if not (0 < q_m and (exp.quotient(m) * q_m) ** 2 < 4 * n):
            violations.append(f"Q_{m} 越界")

    # 对称性
    for m in range(0, tau + 1):
        if exp.Q(m) != exp.Q(tau - m):
            violations.append(f"Q_{m} ≠ Q_{tau - m}")
    for m in range(1, tau + 1):
        if exp.P(tau - m + 1) != exp.P(m):
            violations.append(f"P_{tau - m + 1} ≠ P_{m}")

    # 范数与交叉项
    for m in range(-1, 2 * tau):
        if c(m).norm(n) != (-1) ** (m + 1) * exp.Q(m + 1):
            violations.append(f"p_{m}² − N q_{m}² ≠ (−1)^{m + 1} Q_{m + 1}")
        if m >= 0:
            cross = c(m).p * c(m - 1).p - n * c(m).q * c(m - 1).q
            if cross != (-1) ** m * exp.P(m + 1):
                violations.append(f"p_{m}p_{m - 1} − N q_{m}q_{m - 1} ≠ (−1)^{m} P_{m + 1}")
            # (√N + P_{m+1})(p_m − q_m√N) = −Q_{m+1}(p_{m−1} − q_{m−1}√N)
            lhs = QuadraticInteger(exp.P(m + 1), 1, n) * lift(m).conjugate()
            rhs = lift(m - 1).conjugate() * (-exp.Q(m + 1))
            if lhs != rhs:
                violations.append(f"交叉相乘恒等式在 m = {m} 不成立")

    # p_{τ−2}、q_{τ−2} 与 𝔠_{τ−1} 的关系
    p_last, q_last = c(tau - 1).p, c(tau - 1).q
    if c(tau - 2).p != -exp.a0 * p_last + n * q_last or c(tau - 2).q != p_last - exp.a0 * q_last:
        violations.append("p_{τ−2}, q_{τ−2} 公式不成立")
    for m in range(-1, tau):
        sign = -1 if (m - 1) % 2 else 1
        expect_p = sign * p_last * c(m).p - sign * n * q_last * c(m).q
        expect_q = -sign * p_last * c(m).q + sign * q_last * c(m).p
        if c(tau - m - 2).p != expect_p or c(tau - m - 2).q != expect_q:
            violations.append(f"反射公式在 m = {m} 不成立")

    # 𝔠_{m+kτ} = 𝔠_m 𝔠_{τ−1}^k
    unit = lift(tau - 1)
    for k in range(1, max_k + 1):
        unit_k = unit ** k
        for m in range(-1, tau):
            if lift(m + k * tau) != lift(m) * unit_k:
                violations.append(f"𝔠_{m}+{k}τ ≠ 𝔠_{m}·𝔠_(τ−1)^{k}")

    # ∏(√N + P_{m+1}) = 𝔠_{L−1} ∏Q_{m+1}，L 为 𝚼 的周期
    length = exp.cycle_length
    product, q_product = QuadraticInteger(1, 0, n), 1
    for m in range(length):
        product = product * QuadraticInteger(exp.P(m + 1), 1, n)
        q_product *= exp.Q(m + 1)
    if product != lift(length - 1) * q_product:
        violations.append("乘积恒等式不成立")

    # 中心项
    if exp.is_even:
        if (2 * n) % exp.Q(tau // 2) != 0:
            violations.append("Q_{τ/2} 不整除 2N")
    else:
        h = (tau + 1) // 2
        if exp.Q(h) ** 2 + exp.P(h) ** 2 != n:
            violations.append("Q² + P² ≠ N")

    return violations
