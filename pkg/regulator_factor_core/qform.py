# regulator_factor_core/qform.py
"""
判别式 Δ = 4N 的不定二元二次型 (a, b, c)。

提供约化算子 ρ / ρ⁻¹、约化判定、Gauss 合成、基础距离 δ(F, ρF) 以及带距离记账的巨步。
约化判定与 r 的取值窗口全部使用整数比较：记 s = ⌊√Δ⌋，因 Δ 非平方，
对整数 x 有 x < √Δ ⇔ x ≤ s。
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import gmpy2

from .errors import DegenerateFormError, DiscriminantMismatchError, DistanceBoundError
from .utils import floor_sqrt, format_real, real_context


@dataclass(frozen=True)
class QForm:
    a: int
    b: int
    c: int

    def __post_init__(self):
        # 统一为 mpz，保证比较与哈希一致
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, gmpy2.mpz(getattr(self, name)))

    def __iter__(self):
        yield self.a
        yield self.b
        yield self.c

    def __repr__(self):
        return f"QForm({self.a}, {self.b}, {self.c})"

    @property
    def discriminant(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def as_tuple(self) -> Tuple[int, int, int]:
        return int(self.a), int(self.b), int(self.c)

    def to_list(self):
        """十进制字符串形式，供 JSON 输出。"""
        return [str(v) for v in self.as_tuple()]


def discriminant(f: QForm) -> int:
    return f.b * f.b - 4 * f.a * f.c


def principal_form(n) -> QForm:
    """判别式 4N 的主型 Υ₀ = (1, 2a₀, a₀² − N)。"""
    a0 = int(floor_sqrt(n))
    return QForm(1, 2 * a0, a0 * a0 - n)


def cycle_form(expansion, m: int) -> QForm:
    """由连分数数据直接写出 Υ_m = ((−1)^m Q_m, 2P_{m+1}, (−1)^{m+1} Q_{m+1})。"""
    sign = -1 if m % 2 else 1
    return QForm(sign * expansion.Q(m), 2 * expansion.P(m + 1), -sign * expansion.Q(m + 1))


def _root_of_discriminant(delta) -> gmpy2.mpz:
    if delta <= 0:
        raise DegenerateFormError(f"判别式必须为正，收到 {delta}。")
    s, rem = gmpy2.isqrt_rem(gmpy2.mpz(delta))
    if rem == 0:
        raise DegenerateFormError(f"判别式 {delta} 是完全平方数。")
    return s


def is_reduced(f: QForm) -> bool:
    """|√Δ − 2|a|| < b < √Δ。"""
    delta = f.discriminant
    s = _root_of_discriminant(delta)
    two_a = 2 * abs(f.a)
    return 0 < f.b <= s and two_a - f.b <= s and two_a + f.b > s


def _r_window(minus_b, m, s) -> gmpy2.mpz:
    """
    取 r ≡ −b (mod 2m)：m > √Δ 时落在 (−m, m]，否则落在 (√Δ − 2m, √Δ)。
    """
    modulus = 2 * m
    r = minus_b % modulus
    if m > s:
        if r > m:
            r -= modulus
        return r
    # 窗口 [s + 1 − 2m, s] 恰含 2m 个整数
    return s - ((s - r) % modulus)


def rho(f: QForm) -> QForm:
    """ρ(a, b, c) = (c, r, (r² − Δ)/(4c))，r = r(−b, c)。"""
    if f.a == 0 or f.c == 0:
        raise DegenerateFormError(f"{f} 的首项或末项系数为 0。")
    delta = f.discriminant
    s = _root_of_discriminant(delta)
    r = _r_window(-f.b, abs(f.c), s)
    c_next, rem = gmpy2.f_divmod(r * r - delta, 4 * f.c)
    if rem != 0:
        raise DegenerateFormError(f"{f} 无法整除地施加 ρ。")
    return QForm(f.c, r, c_next)


def rho_inv(f: QForm) -> QForm:
    """ρ⁻¹(a, b, c) = ((r² − Δ)/(4a), r, a)，r = r(−b, a)。"""
    if f.a == 0:
        raise DegenerateFormError(f"{f} 的首项系数为 0。")
    delta = f.discriminant
    s = _root_of_discriminant(delta)
    r = _r_window(-f.b, abs(f.a), s)
    a_prev, rem = gmpy2.f_divmod(r * r - delta, 4 * f.a)
    if rem != 0:
        raise DegenerateFormError(f"{f} 无法整除地施加 ρ⁻¹。")
    return QForm(a_prev, r, f.a)


def reduction_step_limit(f: QForm) -> int:
    """约化所需 ρ 步数的上界 2 + ⌈log₂(|c|/√Δ)⌉，|c| ≤ √Δ 时再留两步余量。"""
    s = _root_of_discriminant(f.discriminant)
    c = abs(f.c)
    if c <= s:
        return 4
    # ⌈log₂(|c|/√Δ)⌉ ≤ ⌈log₂(⌈|c|/s⌉)⌉
    ratio = -((-c) // s)
    return 2 + int((ratio - 1).bit_length())


def reduce_form(f: QForm, ctx=None) -> Tuple[QForm, int, Optional[object]]:
    """
    反复施加 ρ 直到型约化。返回 (约化型, 步数, 距离修正)；
    传入 ctx 时同时累加每一步的 δ(G, ρG)，否则修正为 None。
    """
    limit = reduction_step_limit(f) + 2
    steps = 0
    correction = ctx.mpf(0) if ctx is not None else None
    g = f
    while not is_reduced(g):
        if steps >= limit:
            raise DistanceBoundError(f"{f} 在 {limit} 步内未完成约化。")
        if ctx is not None:
            correction += delta_step(g, ctx)
        g = rho(g)
        steps += 1
    return g, steps, correction


def reduce(f: QForm) -> Tuple[QForm, int]:
    g, steps, _ = reduce_form(f)
    return g, steps


def bezout_witnesses(a1, a2, beta) -> Tuple[gmpy2.mpz, gmpy2.mpz, gmpy2.mpz, gmpy2.mpz]:
    """扩展欧几里得两次：先 gcd(a₁, a₂)，再与 β。返回 (n, s, u, v)。"""
    g1, x1, y1 = gmpy2.gcdext(a1, a2)
    n, x2, v = gmpy2.gcdext(g1, beta)
    return n, x1 * x2, y1 * x2, v


def gauss_compose(f: QForm, g: QForm, witnesses: Optional[Tuple[int, int, int]] = None) -> QForm:
    """
    Gauss 合成。witnesses 为满足 a₁s + a₂u + βv = gcd(a₁, a₂, β) 的 (s, u, v)，
    省略时由 bezout_witnesses 计算。结果只在等价类意义下唯一。
    """
    delta = f.discriminant
    if g.discriminant != delta:
        raise DiscriminantMismatchError(
            f"判别式不一致: {f} 为 {delta}，{g} 为 {g.discriminant}。")
    if (f.b + g.b) % 2:
        raise DegenerateFormError("b₁ + b₂ 必须为偶数。")
    if f.a == 0 or g.a == 0:
        raise DegenerateFormError("首项系数不能为 0。")

    a1, b1, c1 = f
    a2, b2, c2 = g
    beta = (b1 + b2) // 2

    if witnesses is None:
        n, s, u, v = bezout_witnesses(a1, a2, beta)
    else:
        s, u, v = (gmpy2.mpz(x) for x in witnesses)
        n = gmpy2.gcd(gmpy2.gcd(a1, a2), beta)
        if a1 * s + a2 * u + beta * v != n:
            raise DegenerateFormError(f"给定的 Bézout 系数 {tuple(witnesses)} 不成立。")

    d0 = gmpy2.gcd(gmpy2.gcd(gmpy2.gcd(n, c1), c2), (b1 - b2) // 2)
    a3 = d0 * a1 * a2 // (n * n)
    b3 = b1 + (2 * a1 // n) * (s * (b2 - b1) // 2 - c1 * v)
    c3, rem = gmpy2.f_divmod(b3 * b3 - delta, 4 * a3)
    if rem != 0:
        raise DegenerateFormError(f"{f} 与 {g} 的合成结果不是整系数型。")
    return QForm(a3, b3, c3)


def normalize(f: QForm) -> QForm:
    """把 b 平移到 (−|a|, |a|]，对应 x → x + ky 的真等价，理想与距离都不变。"""
    modulus = 2 * abs(f.a)
    b = f.b % modulus
    if b > abs(f.a):
        b -= modulus
    c, rem = gmpy2.f_divmod(b * b - f.discriminant, 4 * f.a)
    if rem != 0:
        raise DegenerateFormError(f"{f} 无法规范化。")
    return QForm(f.a, b, c)


def delta_step(f: QForm, ctx=None):
    """
    δ(F, ρF) = ½ ln |(b + √Δ)/(b − √Δ)|。
    按 sign(b)·(ln(|b| + √Δ) − ½ ln|4ac|) 计算，避免 b 接近 √Δ 时的相消。
    """
    ctx = ctx if ctx is not None else real_context()
    if f.b == 0:
        return ctx.mpf(0)
    delta = f.discriminant
    four_ac = abs(4 * f.a * f.c)
    if four_ac == 0:
        raise DegenerateFormError(f"{f} 满足 b² = Δ，距离无定义。")
    value = ctx.log(abs(int(f.b)) + ctx.sqrt(int(delta))) - ctx.log(int(four_ac)) / 2
    return value if f.b > 0 else -value


@dataclass(frozen=True)
class DistForm:
    """二次型及其相对主型的累积距离（自然对数单位）。"""
    form: QForm
    dist: object

    def to_dict(self, digits: int = 12) -> dict:
        return {"form": self.form.to_list(), "dist": format_real(self.dist, digits)}


@dataclass(frozen=True)
class GiantStepResult:
    result: DistForm
    correction: object
    reduction_steps: int


def giant_step_detailed(f: DistForm, g: DistForm, ctx=None) -> GiantStepResult:
    """合成后约化，返回新型、约化修正 δ(G, F_r) 与约化步数。"""
    ctx = ctx if ctx is not None else real_context()
    composed = gauss_compose(f.form, g.form)
    reduced, steps, correction = reduce_form(normalize(composed), ctx)
    bound = 2 * ctx.log(int(composed.discriminant))
    if abs(correction) >= bound:
        raise DistanceBoundError(
            f"巨步修正 {correction} 超出界 2 ln Δ = {bound}。")
    return GiantStepResult(result=DistForm(reduced, f.dist + g.dist + correction),
                           correction=correction, reduction_steps=steps)


def giant_step(f: DistForm, g: DistForm, ctx=None) -> DistForm:
    """巨步 F • G：距离为 f.dist + g.dist + 约化修正，且 |修正| < 2 ln Δ。"""
    return giant_step_detailed(f, g, ctx).result
