# regulator_factor_core/factorizer.py
"""
借助调节子 R⁺(N) 分解 N。

- 算法 1（R⁺ ≤ (ln N)²）：顺序扫描 Q_i，检查 gcd(Q_i, N)。
- 算法 2（R⁺ > (ln N)²）：先沿 ρ 走出基准型 G₀，再用巨步平方与二进制贪心逼近目标距离
  dist(N) = R⁺/2ʲ，最后从逼近型出发双向走 ρ / ρ⁻¹ 至多 Ψ 步。
- 外部只给出 k·R⁺ 时，用 |c| = 1 的型（Υ_{τ−1} 的特征）判断 k 为偶数并逐次减半。
"""
import sys
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import List, Optional

import gmpy2

from .cf_engine import iter_states
from .config import DEFAULT_TRIAL_DIVISION_BOUND, Settings
from .errors import (CycleTooShortError, DistanceBoundError, OutOfEnvelopeError,
                     ProbablePrimeError, SoundnessError)
from .qform import DistForm, delta_step, giant_step_detailed, principal_form, rho, rho_inv
from .regulator import RegulatorKind, RegulatorValue, regulator_traverse
from .utils import (ceil_log2, format_real, is_probable_prime, real_context, trial_factor,
                    validate_radicand)

ALGORITHM_1 = "algorithm1"
ALGORITHM_2 = "algorithm2"
RESOLVE_MULTIPLE = "resolve_multiple"

# 数值比较时允许的浮点余量
_SLACK = 1e-9


class OutcomeKind(Enum):
    FACTOR = "Factor"
    INAPPLICABLE = "Inapplicable"


@dataclass
class BranchTrace:
    """算法 2 一个分支（j = 1 偶周期，j = 2 奇周期）的记录。距离均为十进制字符串。"""
    j: int
    target: str
    distances: List[str] = field(default_factory=list)
    t: int = 0
    t_bound: int = 0
    greedy_indices: List[int] = field(default_factory=list)
    nominal_distance: str = "0"
    tracked_distance: str = "0"
    approximation_error: str = "0"
    approximation_bound: str = "0"
    max_correction: str = "0"
    psi: int = 0
    steps_used: int = 0
    unit_hits: List[int] = field(default_factory=list)
    unit_hits_near_target: List[int] = field(default_factory=list)
    found: bool = False


@dataclass
class FactorTrace:
    algorithm: str = ""
    regulator: Optional[str] = None
    regulator_kind: Optional[str] = None
    iterations: int = 0
    i_max: int = 0
    base_steps: int = 0
    base_distance: Optional[str] = None
    branches: List[BranchTrace] = field(default_factory=list)
    halving_rounds: int = 0
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "FactorTrace":
        data = dict(data)
        data["branches"] = [BranchTrace(**b) for b in data.get("branches", [])]
        return cls(**data)


@dataclass
class FactorOutcome:
    n: int
    kind: OutcomeKind
    divisor: Optional[int] = None
    trace: FactorTrace = field(default_factory=FactorTrace)

    @property
    def is_factor(self) -> bool:
        return self.kind is OutcomeKind.FACTOR

    def to_dict(self) -> dict:
        return {
            "n": str(self.n),
            "result": self.kind.value,
            "divisor": str(self.divisor) if self.divisor is not None else None,
            "cofactor": str(self.n // self.divisor) if self.divisor is not None else None,
            "trace": self.trace.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FactorOutcome":
        divisor = data.get("divisor")
        return cls(n=int(data["n"]), kind=OutcomeKind(data["result"]),
                   divisor=int(divisor) if divisor is not None else None,
                   trace=FactorTrace.from_dict(data.get("trace", {})))


def _factor_outcome(n: int, d, trace: FactorTrace,
                    trial_bound: int = DEFAULT_TRIAL_DIVISION_BOUND) -> FactorOutcome:
    """
    构造 Factor 结果前无条件校验 1 < d < N 且 d | N。
    d 不是素数时用试除把它化为其最小素因子；试除也找不到时保留 d 并在 trace 中注明。
    """
    d = int(d)
    if not (1 < d < n) or n % d:
        raise SoundnessError(f"内部错误: {d} 不是 {n} 的非平凡因子。")
    if not is_probable_prime(d):
        found = trial_factor(d, trial_bound)
        if found.primes:
            p = min(found.primes)
            trace.notes.append(f"divisor {d} reduced to prime factor {p}")
            d = p
        else:
            trace.notes.append(f"divisor {d} may be composite")
    return FactorOutcome(n=n, kind=OutcomeKind.FACTOR, divisor=d, trace=trace)


def _nontrivial_gcd(value, n) -> Optional[int]:
    g = int(gmpy2.gcd(abs(value), n))
    return g if 1 < g < n else None


@dataclass
class _BranchResult:
    trace: BranchTrace
    divisor: Optional[int] = None


class RegulatorFactorizer:
    """
    封装两种算法与调度逻辑。一个实例可以重复使用，内部只保存参数与实数上下文。
    """

    def __init__(self, settings: Optional[Settings] = None, verbose: bool = False):
        self.settings = settings or Settings()
        self.verbose = verbose
        self.ctx = real_context(self.settings.precision_bits)

    def _log(self, message: str):
        if self.verbose:
            print(message, file=sys.stderr)

    # --- 界 ---

    def i_max(self, n, r_value) -> int:
        """i_max = R⁺/ln 2 + ln(4N)/(2 ln 2) + 1，取上整；配置中的 imax_override 优先。"""
        if self.settings.imax_override is not None:
            return int(self.settings.imax_override)
        ctx = self.ctx
        bound = r_value / ctx.ln2 + ctx.log(4 * n) / (2 * ctx.ln2) + 1
        return int(ctx.ceil(bound))

    def psi(self, n, r_value) -> int:
        """Ψ(R⁺, N) = (2/ln 2)(4 ln(4N) log₂(R⁺/2) + (33/4) ln(4N)) + 1，取上整。"""
        ctx = self.ctx
        ln4n = ctx.log(4 * n)
        log_half = max(ctx.log(r_value / 2, 2), 0)
        bound = (2 / ctx.ln2) * (4 * ln4n * log_half + ctx.mpf(33) / 4 * ln4n) + 1
        return int(ctx.ceil(bound))

    # --- 算法 1 ---

    def algorithm1(self, n, r_plus: RegulatorValue, trace: Optional[FactorTrace] = None) -> FactorOutcome:
        """顺序检查 gcd(Q_i, N)，i = 1 … i_max。"""
        n = int(validate_radicand(n, require_odd=True))
        trace = trace or FactorTrace()
        trace.algorithm = trace.algorithm or ALGORITHM_1
        limit = self.i_max(n, r_plus.value)
        trace.i_max = limit
        self._log(f"算法 1: N = {n}, i_max = {limit}")

        for _, state in iter_states(n):
            i = state.index
            if i == 0:
                continue
            if i > limit:
                break
            trace.iterations = i
            d = _nontrivial_gcd(state.q_coef, n)
            if d is not None:
                trace.notes.append(f"gcd(Q_{i}, N) = {d}")
                return _factor_outcome(n, d, trace, self.settings.trial_division_bound)

        return FactorOutcome(n=n, kind=OutcomeKind.INAPPLICABLE, trace=trace)

    # --- 算法 2 ---

    def build_base_form(self, n) -> DistForm:
        """
        从 Υ₀ 出发施加 ρ，直到 δ(Υ₀, G₀) ≥ 2 ln(4N) + 1。
        主循环在此之前闭合时抛出 CycleTooShortError。
        """
        form, _ = self._base_form_with_steps(int(n))
        return form

    def _base_form_with_steps(self, n: int):
        ctx = self.ctx
        threshold = 2 * ctx.log(4 * n) + 1
        principal = principal_form(n)
        form, dist, steps = principal, ctx.mpf(0), 0
        while dist < threshold:
            dist += delta_step(form, ctx)
            form = rho(form)
            steps += 1
            if form == principal:
                raise CycleTooShortError(
                    f"主循环总长 {format_real(dist)} 小于 2 ln(4N) + 1，应改用算法 1。")
        if dist > 4 * ctx.log(n):
            raise DistanceBoundError(f"基准型距离 {format_real(dist)} 超过 4 ln N。")
        return DistForm(form, dist), steps

    def _run_branch(self, n: int, base: DistForm, multiple, j: int,
                    stop_on_unit: bool = False) -> _BranchResult:
        """
        在目标距离 multiple/2ʲ 附近搜索；multiple 为 R⁺ 或其倍数。
        stop_on_unit 为真时，在目标距离 ln(4N) 以内遇到 |c| = 1 的型即停止（用于判断倍数为偶）。
        """
        ctx = self.ctx
        ln4n = ctx.log(4 * n)
        target = multiple / 2 ** j
        trace = BranchTrace(j=j, target=format_real(target))

        # 1. 反复平方：G_{i+1} = G_i • G_i，直到 d_t > target
        powers = [base]
        max_correction = ctx.mpf(0)
        if base.dist <= target:
            while powers[-1].dist <= target:
                step = giant_step_detailed(powers[-1], powers[-1], ctx)
                max_correction = max(max_correction, abs(step.correction))
                powers.append(step.result)
        t = len(powers) - 1
        trace.t = t
        trace.distances = [format_real(g.dist) for g in powers]
        trace.t_bound = ceil_log2(target) if target > 1 else 0
        if t > max(trace.t_bound, 0):
            raise DistanceBoundError(f"平方次数 t = {t} 超过 ⌈log₂ dist(N)⌉ = {trace.t_bound}。")

        # 2. 二进制贪心：从 G_{t−1} 起，按名义距离从高到低累加
        if t == 0:
            approx = DistForm(principal_form(n), ctx.mpf(0))
            nominal = ctx.mpf(0)
            chosen = []
        else:
            approx = powers[t - 1]
            nominal = powers[t - 1].dist
            chosen = [t - 1]
            for i in range(t - 2, -1, -1):
                if nominal + powers[i].dist <= target:
                    step = giant_step_detailed(approx, powers[i], ctx)
                    max_correction = max(max_correction, abs(step.correction))
                    approx = step.result
                    nominal += powers[i].dist
                    chosen.append(i)
        trace.greedy_indices = chosen
        trace.nominal_distance = format_real(nominal)
        trace.tracked_distance = format_real(approx.dist)
        trace.max_correction = format_real(max_correction)

        # 名义误差：未选 G₀ 时 < d₀；选了 G₀ 时每个被选中的幂最多多出一个 2 ln Δ
        error = target - nominal
        if t == 0 or 0 not in chosen:
            bound = powers[0].dist
        else:
            bound = powers[0].dist + len(chosen) * 2 * ln4n
        trace.approximation_error = format_real(error)
        trace.approximation_bound = format_real(bound)
        if error < -_SLACK or error > bound + _SLACK:
            raise DistanceBoundError(
                f"贪心逼近误差 {format_real(error)} 超出界 {format_real(bound)}。")

        # 3. 从逼近型出发双向走 ρ 与 ρ⁻¹，同时累加两侧的精确距离
        psi = self.psi(n, multiple)
        trace.psi = psi
        window = ln4n
        forward = backward = approx.form
        forward_dist = backward_dist = approx.dist

        def note_unit(form, dist, offset):
            if abs(form.c) == 1:
                trace.unit_hits.append(offset)
                # |c| = 1 的型与目标距离相差不超过 ln(4N) 才说明目标是 R⁺ 的整数倍
                if abs(dist - target) <= window:
                    trace.unit_hits_near_target.append(offset)

        d = _nontrivial_gcd(approx.form.c, n)
        note_unit(approx.form, approx.dist, 0)
        if d is None and not (stop_on_unit and trace.unit_hits_near_target):
            for i in range(1, psi + 1):
                forward_dist += delta_step(forward, ctx)
                forward = rho(forward)
                backward = rho_inv(backward)
                backward_dist -= delta_step(backward, ctx)
                trace.steps_used = i
                note_unit(forward, forward_dist, i)
                note_unit(backward, backward_dist, -i)
                d = _nontrivial_gcd(forward.c, n) or _nontrivial_gcd(backward.c, n)
                if d is not None or (stop_on_unit and trace.unit_hits_near_target):
                    break
        trace.found = d is not None
        self._log(f"  分支 j = {j}: target = {trace.target}, t = {t}, "
                  f"步数 {trace.steps_used}/{psi}, {'找到因子' if d else '未找到'}")
        return _BranchResult(trace=trace, divisor=d)

    def algorithm2(self, n, r_plus: RegulatorValue, trace: Optional[FactorTrace] = None) -> FactorOutcome:
        """依次运行 j = 1（τ 偶）与 j = 2（τ 奇）两个分支。"""
        n = int(validate_radicand(n, require_odd=True))
        trace = trace or FactorTrace()
        trace.algorithm = trace.algorithm or ALGORITHM_2
        base, steps = self._base_form_with_steps(n)
        trace.base_steps = steps
        trace.base_distance = format_real(base.dist)
        self._log(f"算法 2: N = {n}, 基准型 {base.form}，距离 {trace.base_distance}")

        for j in (1, 2):
            branch = self._run_branch(n, base, r_plus.value, j)
            trace.branches.append(branch.trace)
            if branch.divisor is not None:
                return _factor_outcome(n, branch.divisor, trace, self.settings.trial_division_bound)
            trace.notes.append(f"branch j={j} exhausted")
        return FactorOutcome(n=n, kind=OutcomeKind.INAPPLICABLE, trace=trace)

    def resolve_multiple(self, n, r_prime: RegulatorValue,
                         trace: Optional[FactorTrace] = None) -> FactorOutcome:
        """
        R' = k·R⁺ 时：以 R'/2 为目标运行偶分支；若目标附近出现 |c| = 1 的型，
        说明 k 为偶数，把 R' 减半后重试。未见该特征时再试一次奇分支后结束。
        """
        n = int(validate_radicand(n, require_odd=True))
        trace = trace or FactorTrace()
        trace.algorithm = trace.algorithm or RESOLVE_MULTIPLE
        ctx = self.ctx
        small = ctx.log(n) ** 2
        current = r_prime.value

        base = None
        while True:
            if current <= small:
                trace.notes.append(f"multiple {format_real(current)} ≤ (ln N)², switching to algorithm1")
                reduced = RegulatorValue(value=current, kind=r_prime.kind, multiplier_hint=None, n=n)
                outcome = self.algorithm1(n, reduced, trace)
                if outcome.is_factor or base is None:
                    return outcome
                break
            if base is None:
                base, steps = self._base_form_with_steps(n)
                trace.base_steps = steps
                trace.base_distance = format_real(base.dist)

            even = self._run_branch(n, base, current, 1, stop_on_unit=True)
            trace.branches.append(even.trace)
            if even.divisor is not None:
                return _factor_outcome(n, even.divisor, trace, self.settings.trial_division_bound)

            if even.trace.unit_hits_near_target:
                if trace.halving_rounds >= self.settings.max_halving_rounds:
                    trace.notes.append("halving limit reached")
                    break
                trace.halving_rounds += 1
                current = current / 2
                self._log(f"  检测到 |c| = 1，倍数减半为 {format_real(current)}")
                continue

            odd = self._run_branch(n, base, current, 2)
            trace.branches.append(odd.trace)
            if odd.divisor is not None:
                return _factor_outcome(n, odd.divisor, trace, self.settings.trial_division_bound)
            break

        # 减半路径没有结果时，在原倍数上做一次不提前停止的完整搜索
        if trace.halving_rounds and base is not None:
            trace.notes.append("halving path exhausted, full search at the original multiple")
            for j in (1, 2):
                branch = self._run_branch(n, base, r_prime.value, j)
                trace.branches.append(branch.trace)
                if branch.divisor is not None:
                    return _factor_outcome(n, branch.divisor, trace, self.settings.trial_division_bound)

        return FactorOutcome(n=n, kind=OutcomeKind.INAPPLICABLE, trace=trace)

    # --- 调度 ---

    def factor(self, n, regulator: Optional[RegulatorValue] = None) -> FactorOutcome:
        """
        校验输入，取得调节子（遍历或外部给定），按 (ln N)² 阈值分派到算法 1 或算法 2。
        外部给定且倍数未知时走 resolve_multiple。
        """
        # 1. 输入校验
        n = int(validate_radicand(n, require_odd=True))
        if is_probable_prime(n):
            raise ProbablePrimeError(n)

        # 2. 调节子
        if regulator is None:
            if n.bit_length() > self.settings.max_traversal_bits:
                raise OutOfEnvelopeError(
                    f"N 有 {n.bit_length()} 位，超过遍历法上限 {self.settings.max_traversal_bits} 位；"
                    f"请通过 --regulator 或 --regulator-multiple 提供调节子。")
            regulator = regulator_traverse(n, self.settings, self.verbose)

        trace = FactorTrace(regulator=format_real(regulator.value),
                            regulator_kind=regulator.kind.value)
        trace.notes.extend(regulator.notes)
        unknown_multiple = (regulator.kind is RegulatorKind.EXTERNAL_MULTIPLE
                            and regulator.multiplier_hint != 1)

        # 3. 分派
        if regulator.value <= self.ctx.log(n) ** 2:
            trace.algorithm = ALGORITHM_1
            return self.algorithm1(n, regulator, trace)
        try:
            if unknown_multiple:
                trace.algorithm = RESOLVE_MULTIPLE
                return self.resolve_multiple(n, regulator, trace)
            trace.algorithm = ALGORITHM_2
            return self.algorithm2(n, regulator, trace)
        except CycleTooShortError as e:
            trace.notes.append(f"fallback to algorithm1: {e}")
            trace.algorithm = ALGORITHM_1
            trace.branches = []
            return self.algorithm1(n, regulator, trace)


def factor(n, settings: Optional[Settings] = None, regulator: Optional[RegulatorValue] = None,
           verbose: bool = False) -> FactorOutcome:
    return RegulatorFactorizer(settings, verbose).factor(n, regulator)
