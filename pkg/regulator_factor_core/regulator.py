# regulator_factor_core/regulator.py
"""
R⁺(N) 的来源：沿主循环逐步累加 δ 的精确遍历（桌面规模），或外部给定的 k·R⁺(N)。
"""
import sys
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, List, Optional, Tuple

import gmpy2

from .cf_engine import expand_sqrt, period_parity, pell_fundamental_solution
from .config import Settings
from .errors import RegulatorInputError, RegulatorMismatchError
from .qform import QForm, delta_step, principal_form, rho
from .utils import format_real, real_context, validate_radicand


class RegulatorKind(Enum):
    EXACT_TRAVERSAL = "ExactTraversal"
    EXTERNAL_MULTIPLE = "ExternalMultiple"


@dataclass(frozen=True)
class RegulatorValue:
    """
    value 为自然对数单位的实数（mpmath mpf）。
    multiplier_hint 为 1 表示已知就是 R⁺(N) 本身；外部倍数未知 k 时为 None。
    """
    value: object
    kind: RegulatorKind
    multiplier_hint: Optional[int] = None
    n: Optional[int] = None
    tau: Optional[int] = None
    notes: Tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.value > 0:
            raise RegulatorInputError(f"调节子必须为正数，收到 {self.value}。")

    @property
    def is_exact(self) -> bool:
        return self.multiplier_hint == 1

    def to_dict(self) -> dict:
        return {
            "value": format_real(self.value),
            "kind": self.kind.value,
            "multiplier_hint": self.multiplier_hint,
            "tau": self.tau,
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class CycleEntry:
    """主循环中的一项：Υ_index 及 δ(Υ₀, Υ_index)。"""
    index: int
    form: QForm
    dist: object

    def to_dict(self) -> dict:
        return {"index": self.index, "form": self.form.to_list(), "dist": format_real(self.dist)}


def iter_principal_cycle(n, ctx=None) -> Iterator[CycleEntry]:
    """
    从 Υ₀ 出发无限地施加 ρ，依次产出 (index, 型, 累积距离)。
    调用方负责在回到 Υ₀ 时停止。
    """
    ctx = ctx if ctx is not None else real_context()
    form = principal_form(n)
    dist = ctx.mpf(0)
    index = 0
    while True:
        yield CycleEntry(index, form, dist)
        dist += delta_step(form, ctx)
        form = rho(form)
        index += 1


def walk_principal_cycle(n, settings: Optional[Settings] = None) -> List[CycleEntry]:
    """返回一个完整周期 Υ₀ … Υ_L（含闭合项 Υ_L = Υ₀），L 为 τ 或 2τ。"""
    settings = settings or Settings()
    n = int(validate_radicand(n))
    scan = period_parity(n, settings.step_cap)
    length = scan.tau if scan.is_even else 2 * scan.tau
    ctx = real_context(settings.precision_bits)
    entries = []
    for entry in iter_principal_cycle(n, ctx):
        entries.append(entry)
        if entry.index == length:
            break
    return entries


def convergent_logarithm(n, ctx, step_cap: Optional[int] = None):
    """ln(p + q√N)，(p, q) 为 Pell 方程的基本解。"""
    pell = pell_fundamental_solution(expand_sqrt(n, step_cap))
    return ctx.log(ctx.mpf(pell.p) + ctx.mpf(pell.q) * ctx.sqrt(n))


def regulator_traverse(n, settings: Optional[Settings] = None, verbose: bool = False) -> RegulatorValue:
    """
    遍历主循环求 R⁺(N)：偶周期累加 τ 步，奇周期累加 2τ 步。
    τ 不超过 crosscheck_max_tau 时与收敛子对数交叉校验，相对误差超过容差则报错。
    """
    settings = settings or Settings()
    n = int(validate_radicand(n))
    ctx = real_context(settings.precision_bits)
    notes = []

    # 1. 半周期扫描确定 τ 与循环长度
    scan = period_parity(n, settings.step_cap)
    tau = scan.tau
    length = tau if scan.is_even else 2 * tau
    if verbose:
        print(f"N = {n}: τ = {tau}，主循环长度 {length}", file=sys.stderr)

    # 2. 沿主循环累加距离，顺带记录对称点处的距离
    marks = {tau // 2, tau, (tau - 1) // 2}
    marked = {}
    principal = principal_form(n)
    total = None
    for entry in iter_principal_cycle(n, ctx):
        if entry.index in marks:
            marked[entry.index] = entry.dist
        if entry.index == length:
            if entry.form != principal:
                raise RegulatorMismatchError(f"Υ_{length} ≠ Υ₀，主循环未按预期闭合。")
            total = entry.dist
            break
        if entry.index > 0 and entry.form == principal:
            raise RegulatorMismatchError(f"主循环在第 {entry.index} 步提前闭合。")

    # 3. 对称点检查
    tolerance = settings.regulator_tolerance
    if scan.is_even:
        if abs(marked[tau // 2] - total / 2) > tolerance * total:
            raise RegulatorMismatchError("δ(Υ₀, Υ_{τ/2}) 与 R⁺/2 不一致。")
    else:
        if abs(marked[tau] - total / 2) > tolerance * total:
            raise RegulatorMismatchError("δ(Υ₀, Υ_τ) 与 R⁺/2 不一致。")
        quarter = marked[(tau - 1) // 2]
        if abs(quarter - total / 4) > ctx.log(4 * n) / 4:
            raise RegulatorMismatchError("δ(Υ₀, Υ_{(τ−1)/2}) 偏离 R⁺/4 过多。")

    # 4. 收敛子交叉校验
    if tau <= settings.crosscheck_max_tau:
        reference = convergent_logarithm(n, ctx, settings.step_cap)
        relative = abs(total - reference) / reference
        if relative >= tolerance:
            raise RegulatorMismatchError(
                f"遍历求和 {format_real(total)} 与 ln(p + q√N) = {format_real(reference)} "
                f"的相对误差 {format_real(relative, 3)} 超过容差 {tolerance}。")
        notes.append("crosscheck:convergent")
    else:
        notes.append(f"crosscheck:skipped(tau>{settings.crosscheck_max_tau})")
        if verbose:
            print(f"警告: τ = {tau} 过大，跳过收敛子交叉校验。", file=sys.stderr)

    return RegulatorValue(value=total, kind=RegulatorKind.EXACT_TRAVERSAL, multiplier_hint=1,
                          n=n, tau=tau, notes=tuple(notes))


def accept_external(n, r_prime, exact: bool = False,
                    settings: Optional[Settings] = None) -> RegulatorValue:
    """
    包装外部给定的 R'（十进制字符串、整数、浮点数或 mpf）。
    不验证整除性；exact 为真表示调用方声明 R' 就是 R⁺(N)。
    """
    settings = settings or Settings()
    ctx = real_context(settings.precision_bits)
    try:
        value = ctx.mpf(r_prime) if not isinstance(r_prime, str) else ctx.mpf(r_prime.strip())
    except (TypeError, ValueError) as e:
        raise RegulatorInputError(f"无法解析调节子数值 {r_prime!r}: {e}")
    if ctx.isnan(value) or ctx.isinf(value) or value <= 0:
        raise RegulatorInputError(f"调节子必须为有限正数，收到 {r_prime!r}。")
    return RegulatorValue(value=value, kind=RegulatorKind.EXTERNAL_MULTIPLE,
                          multiplier_hint=1 if exact else None, n=int(n))


def hua_regulator_bound(n, settings: Optional[Settings] = None):
    """R⁺(N) ≤ 6·R(N) 的上界：N ≡ 1 (mod 4) 时 R(N) ≤ √N(½ln N + 1)，否则 ≤ 2√N(½ln(4N) + 1)。"""
    settings = settings or Settings()
    ctx = real_context(settings.precision_bits)
    n = gmpy2.mpz(n)
    if n % 4 == 1:
        bound = ctx.sqrt(int(n)) * (ctx.log(int(n)) / 2 + 1)
    else:
        bound = 2 * ctx.sqrt(int(n)) * (ctx.log(int(4 * n)) / 2 + 1)
    return 6 * bound
