# regulator_factor_core/bench.py
"""
批量运行与验收套件。

每个套件对一组 N 逐个执行同一检查，返回 BenchSummary：检查数、失败列表与聚合统计。
workers > 1 时用进程池并行，进度条输出到标准错误。
"""
import math
import random
import sys
import time
from dataclasses import dataclass, field
from functools import partial
from multiprocessing import Pool
from typing import Callable, Iterable, List, Optional

import gmpy2
import numpy as np
from tqdm import tqdm

from .cf_engine import check_identities, expand_sqrt, period_parity, sum_two_squares
from .classify import odd_period_fraction
from .config import Settings
from .errors import FactorToolkitError, SamplingExhaustedError
from .factorizer import RegulatorFactorizer
from .qform import cycle_form, delta_step, principal_form, rho
from .regulator import accept_external, iter_principal_cycle, regulator_traverse
from .utils import ceil_log2, floor_sqrt, format_real, is_probable_prime, real_context, trial_factor

SUITES = ("factor", "identities", "central", "sum2sq", "multiples", "scaling", "stat")
CLASSES = ("all", "3x3mod4", "5x3mod8", "F", "guaranteed")
MULTIPLIERS = (1, 2, 3, 4, 8)

# 报告中最多列出的失败条目
MAX_LISTED_FAILURES = 20
# scaling 套件每个位数的最大抽样次数
MAX_SCALING_DRAWS = 64


@dataclass
class BenchSummary:
    suite: str
    params: dict
    checked: int = 0
    failures: List[str] = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "params": self.params,
            "checked": self.checked,
            "failure_count": len(self.failures),
            "failures": self.failures[:MAX_LISTED_FAILURES],
            "stats": self.stats,
        }


def parse_range(text: str):
    """解析 "A..B"（两端都包含）。"""
    try:
        lo, hi = (int(part) for part in text.split(".."))
    except ValueError:
        raise ValueError(f"范围格式应为 A..B，收到 {text!r}。")
    if lo < 2 or hi < lo:
        raise ValueError(f"范围 {text} 无效，需要 2 ≤ A ≤ B。")
    return lo, hi


# --- 分类 ---

def radicand_classes(n: int) -> set:
    """N 所属的分解类别标签（见 CLASSES）。"""
    found = trial_factor(n, int(floor_sqrt(n)) + 1)
    primes = found.primes
    labels = set()
    if n % 4 == 1 and any(p % 4 == 3 for p in primes):
        labels.add("F")
    if len(primes) == 2 and all(e == 1 for e in primes.values()):
        p, q = sorted(primes)
        if p % 4 == 3 and q % 4 == 3:
            labels.add("3x3mod4")
        if (p % 8 == 5 and q % 4 == 3) or (q % 8 == 5 and p % 4 == 3):
            labels.add("5x3mod8")
    if labels:
        labels.add("guaranteed")
    return labels


def factor_candidates(lo: int, hi: int, klass: str = "all") -> List[int]:
    """区间内的奇数、非平方、合数 N，按类别过滤。"""
    result = []
    for n in range(lo | 1, hi + 1, 2):
        if gmpy2.is_square(n) or is_probable_prime(n):
            continue
        if klass != "all" and klass not in radicand_classes(n):
            continue
        result.append(n)
    return result


def random_semiprime(rng: random.Random, bits: int, row: str) -> int:
    """
    生成约 bits 位的保证类半素数。
    row 为 "3x3mod4"（p ≡ q ≡ 3 mod 4）或 "5x3mod8"（p ≡ 5 mod 8，q ≡ 3 mod 4）。
    """
    half = max(bits // 2, 3)
    residues = {"3x3mod4": ((4, 3), (4, 3)), "5x3mod8": ((8, 5), (4, 3))}[row]
    while True:
        primes = []
        for modulus, residue in residues:
            p = gmpy2.next_prime(rng.getrandbits(half) | (1 << (half - 1)))
            while p % modulus != residue:
                p = gmpy2.next_prime(p)
            primes.append(int(p))
        p, q = primes
        if p != q and (p * q).bit_length() <= bits:
            return p * q


# --- 单个 N 的检查（进程池中执行，必须是模块级函数）---

def _check_factor(n: int, settings: Settings):
    start = time.perf_counter()
    try:
        outcome = RegulatorFactorizer(settings).factor(n)
    except FactorToolkitError as e:
        return n, None, None, time.perf_counter() - start, str(e)
    elapsed = time.perf_counter() - start
    return n, outcome.kind.value, outcome.divisor, elapsed, None


def _check_identities(n: int, settings: Settings) -> List[str]:
    problems = []
    try:
        exp = expand_sqrt(n, settings.step_cap)
        problems.extend(check_identities(exp))

        # ρ 轨道与连分数给出的型逐项一致，m ≤ 2τ
        form = principal_form(n)
        for m in range(2 * exp.tau + 1):
            if form != cycle_form(exp, m):
                problems.append(f"ρ^{m}(Υ₀) = {form} ≠ {cycle_form(exp, m)}")
                break
            form = rho(form)

        # 单步距离的上下界
        ctx = real_context(settings.precision_bits)
        half_log = ctx.log(4 * n) / 2
        for entry in iter_principal_cycle(n, ctx):
            if entry.index >= exp.cycle_length:
                break
            one = delta_step(entry.form, ctx)
            two = one + delta_step(rho(entry.form), ctx)
            if not one < half_log:
                problems.append(f"δ(Υ_{entry.index}, ρΥ) = {format_real(one)} ≥ ½ ln Δ")
            if not two > ctx.ln2:
                problems.append(f"δ(Υ_{entry.index}, ρ²Υ) = {format_real(two)} ≤ ln 2")

        # 周期距离等于 Pell 基本解的对数（遍历内部做交叉校验）
        regulator_traverse(n, settings.merged(crosscheck_max_tau=max(exp.tau, settings.crosscheck_max_tau)))
    except FactorToolkitError as e:
        problems.append(str(e))
    return [f"N={n}: {p}" for p in problems]


def _check_central(n: int, settings: Settings) -> Optional[str]:
    scan = period_parity(n, settings.step_cap)
    if not scan.is_even or scan.central_q in (1, 2):
        return None
    try:
        outcome = RegulatorFactorizer(settings).factor(n)
    except FactorToolkitError as e:
        return f"N={n}: {e}"
    if not outcome.is_factor:
        return f"N={n}: τ={scan.tau}，Q_τ/2={scan.central_q}，结果为 {outcome.kind.value}"
    # 与试除给出的素因子分解对照
    found = trial_factor(n, int(floor_sqrt(n)) + 1)
    rest = outcome.divisor
    for p, e in found.primes.items():
        for _ in range(e):
            if rest % p == 0:
                rest //= p
    if rest != 1:
        return f"N={n}: 因子 {outcome.divisor} 与试除结果不符"
    return ""


def _check_sum2sq(n: int, settings: Settings) -> Optional[str]:
    scan = period_parity(n, settings.step_cap)
    if scan.is_even:
        return None
    a, b = sum_two_squares(n, settings.step_cap)
    if a * a + b * b != n:
        return f"N={n}: {a}² + {b}² ≠ N"
    return ""


def _check_multiples(n: int, settings: Settings) -> List[str]:
    problems = []
    factorizer = RegulatorFactorizer(settings)
    try:
        exact = regulator_traverse(n, settings)
    except FactorToolkitError as e:
        return [f"N={n}: {e}"]
    for k in MULTIPLIERS:
        regulator = accept_external(n, exact.value * k, settings=settings)
        try:
            outcome = factorizer.factor(n, regulator)
        except FactorToolkitError as e:
            problems.append(f"N={n}, k={k}: {e}")
            continue
        if not outcome.is_factor:
            problems.append(f"N={n}, k={k}: 未找到因子")
        limit = ceil_log2(k) + 1
        if outcome.trace.halving_rounds > limit:
            problems.append(f"N={n}, k={k}: 减半 {outcome.trace.halving_rounds} 轮，超过 {limit}")
    return problems


def _run_pool(func: Callable, items: Iterable, settings: Settings, desc: str, progress: bool) -> list:
    items = list(items)
    task = partial(func, settings=settings)
    bar = dict(total=len(items), desc=desc, disable=not progress, file=sys.stderr)
    if settings.workers > 1 and len(items) > 1:
        with Pool(settings.workers) as pool:
            return list(tqdm(pool.imap(task, items, chunksize=8), **bar))
    return [task(n) for n in tqdm(items, **bar)]


# --- 套件 ---

def bench_factor(lo: int, hi: int, klass: str, settings: Settings, progress: bool = False) -> BenchSummary:
    """对区间内的候选 N 运行分解器；保证类中出现 Inapplicable 或错误即记为失败。"""
    candidates = factor_candidates(lo, hi, klass)
    summary = BenchSummary("factor", {"range": f"{lo}..{hi}", "class": klass})
    rows = _run_pool(_check_factor, candidates, settings, "分解", progress)
    times = np.array([r[3] for r in rows]) if rows else np.zeros(0)
    factored = 0
    for n, kind, divisor, _, error in rows:
        if error is not None:
            summary.failures.append(f"N={n}: {error}")
        elif divisor is not None:
            factored += 1
        elif "guaranteed" in radicand_classes(n):
            summary.failures.append(f"N={n}: {kind}")
    summary.checked = len(rows)
    summary.stats = {
        "factored": factored,
        "inapplicable": len(rows) - factored - sum(1 for r in rows if r[4] is not None),
        "mean_ms": f"{times.mean() * 1000:.3f}" if times.size else "0",
        "max_ms": f"{times.max() * 1000:.3f}" if times.size else "0",
    }
    return summary


def bench_identities(lo: int, hi: int, settings: Settings, progress: bool = False) -> BenchSummary:
    candidates = [n for n in range(lo, hi + 1) if not gmpy2.is_square(n)]
    summary = BenchSummary("identities", {"range": f"{lo}..{hi}"})
    for problems in _run_pool(_check_identities, candidates, settings, "恒等式", progress):
        summary.failures.extend(problems)
    summary.checked = len(candidates)
    return summary


def _bench_simple(name: str, func: Callable, lo: int, hi: int, settings: Settings,
                  progress: bool, odd_only: bool) -> BenchSummary:
    step = 2 if odd_only else 1
    start = (lo | 1) if odd_only else lo
    candidates = [n for n in range(start, hi + 1, step) if not gmpy2.is_square(n)]
    summary = BenchSummary(name, {"range": f"{lo}..{hi}"})
    for result in _run_pool(func, candidates, settings, name, progress):
        if result is None:
            continue
        summary.checked += 1
        if result:
            summary.failures.append(result)
    return summary


def bench_central(lo: int, hi: int, settings: Settings, progress: bool = False) -> BenchSummary:
    """τ 偶且 Q_{τ/2} ∉ {1, 2} 的奇数 N 必须被分解。"""
    return _bench_simple("central", _check_central, lo, hi, settings, progress, odd_only=True)


def bench_sum2sq(lo: int, hi: int, settings: Settings, progress: bool = False) -> BenchSummary:
    """τ 奇的 N 必须给出 a² + b² = N。"""
    return _bench_simple("sum2sq", _check_sum2sq, lo, hi, settings, progress, odd_only=False)


def bench_multiples(count: int, bits: int, settings: Settings, progress: bool = False) -> BenchSummary:
    """随机保证类半素数，以 k·R⁺（k ∈ MULTIPLIERS）作为外部倍数调用分解器。"""
    rng = random.Random(settings.seed)
    rows = ("3x3mod4", "5x3mod8")
    moduli = [random_semiprime(rng, bits, rows[i % 2]) for i in range(count)]
    summary = BenchSummary("multiples", {"count": count, "bits": bits,
                                         "multipliers": list(MULTIPLIERS), "seed": settings.seed})
    for problems in _run_pool(_check_multiples, moduli, settings, "倍数", progress):
        summary.failures.extend(problems)
    summary.checked = len(moduli)
    return summary


def _draw_large_regulator(rng: random.Random, bits: int, factorizer: RegulatorFactorizer):
    """从同一随机流中重抽，直到 R⁺ > (ln N)²。返回 (N, 调节子, 被拒次数)。"""
    settings = factorizer.settings
    for rejected in range(MAX_SCALING_DRAWS):
        n = random_semiprime(rng, bits, "3x3mod4")
        regulator = regulator_traverse(n, settings)
        if regulator.value > factorizer.ctx.log(n) ** 2:
            return n, regulator, rejected
    raise SamplingExhaustedError(f"{MAX_SCALING_DRAWS} 次抽样内没有 R⁺ > (ln N)² 的 {bits} 位半素数。")


def bench_scaling(bit_sizes: Iterable[int], settings: Settings, progress: bool = False) -> BenchSummary:
    """
    已知调节子时算法 2 的墙钟时间随 ln N 的增长。
    每个位数都重抽到 R⁺ > (ln N)² 为止，保证每个规模都贡献一个点。
    对 log(时间) 与 log(ln N) 做最小二乘直线拟合，报告斜率；不设通过阈值。
    """
    rng = random.Random(settings.seed)
    bit_sizes = list(bit_sizes)
    summary = BenchSummary("scaling", {"bits": bit_sizes, "seed": settings.seed})
    factorizer = RegulatorFactorizer(settings)
    points = []
    resampled = 0
    for bits in tqdm(bit_sizes, desc="规模", disable=not progress, file=sys.stderr):
        try:
            n, regulator, rejected = _draw_large_regulator(rng, bits, factorizer)
            resampled += rejected
            start = time.perf_counter()
            outcome = factorizer.algorithm2(n, regulator)
            elapsed = time.perf_counter() - start
        except FactorToolkitError as e:
            summary.failures.append(f"bits={bits}: {e}")
            continue
        summary.checked += 1
        if not outcome.is_factor:
            summary.failures.append(f"N={n}: {outcome.kind.value}")
        points.append((bits, n, elapsed, format_real(regulator.value)))

    summary.stats["resampled"] = resampled
    summary.stats["points"] = [
        {"bits": b, "n": str(n), "ms": f"{t * 1000:.3f}", "regulator": r} for b, n, t, r in points]
    if len(points) >= 2:
        x = np.log([math.log(n) for _, n, _, _ in points])
        y = np.log([max(t, 1e-9) for _, _, t, _ in points])
        slope, _ = np.polyfit(x, y, 1)
        summary.stats["ln_n_exponent"] = f"{slope:.3f}"
    return summary


def bench_stat(limit: int, two_primes_only: bool, settings: Settings, progress: bool = False) -> BenchSummary:
    """奇周期比例统计，仅供参考。"""
    stat = odd_period_fraction(limit, two_primes_only, settings, progress)
    summary = BenchSummary("stat", {"limit": limit, "two_primes_only": two_primes_only})
    summary.checked = stat.sample_size
    summary.stats = {k: str(v) for k, v in stat.to_dict().items()}
    return summary


def run_suite(suite: str, settings: Settings, lo: int = 3, hi: int = 2000, klass: str = "all",
              count: int = 100, bits: int = 32, max_bits: int = 40,
              two_primes_only: bool = False, progress: bool = False) -> BenchSummary:
    if suite == "factor":
        return bench_factor(lo, hi, klass, settings, progress)
    if suite == "identities":
        return bench_identities(lo, hi, settings, progress)
    if suite == "central":
        return bench_central(lo, hi, settings, progress)
    if suite == "sum2sq":
        return bench_sum2sq(lo, hi, settings, progress)
    if suite == "multiples":
        return bench_multiples(count, bits, settings, progress)
    if suite == "scaling":
        return bench_scaling(range(20, max_bits + 1, 4), settings, progress)
    if suite == "stat":
        return bench_stat(hi, two_primes_only, settings, progress)
    raise ValueError(f"未知的套件 {suite!r}，可选: {', '.join(SUITES)}。")
