# regulator_factor_core/cli.py
"""
命令行入口：cli_dispatch(argv) 返回退出码。

退出码：0 成功（或找到因子），2 Inapplicable，1 输入错误或内部错误，64 用法错误。
--json 时标准输出只有一份 RunReport 文档，进度与警告都写到标准错误。
"""
import argparse
import sys
from typing import List, Optional

from .bench import CLASSES, SUITES, parse_range, run_suite
from .cf_engine import convergents, expand_sqrt, sum_two_squares
from .classify import measure_central, predict_central, predict_parity
from .config import CONFIG_FILE, load_settings
from .factorizer import RegulatorFactorizer
from .regulator import accept_external, hua_regulator_bound, regulator_traverse, walk_principal_cycle
from .report import RunReport, Stopwatch
from .utils import format_real, validate_radicand

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INAPPLICABLE = 2
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    """用法错误统一以 64 退出，而不是 argparse 默认的 2（2 留给 Inapplicable）。"""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"错误: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _decimal(text: str) -> int:
    try:
        return int(text.strip(), 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} 不是十进制整数。")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument('--config', type=str, default=CONFIG_FILE, help=f"配置文件路径 (默认: {CONFIG_FILE})。")
    common.add_argument('--precision-bits', type=int, default=None, help="距离计算的二进制精度，至少 64。")
    common.add_argument('--step-cap', type=int, default=None, help="连分数展开的最大步数。")
    common.add_argument('--json', action='store_true', help="以 JSON 报告输出。")
    common.add_argument('-v', '--verbose', action='store_true', help="在标准错误输出过程信息。")

    parser = _Parser(prog="main_factor.py", description="借助调节子 R⁺(N) 的整数分解工具。")
    sub = parser.add_subparsers(dest='command', parser_class=_Parser)
    sub.required = True

    p = sub.add_parser('expand', parents=[common], help="展开 √N 的连分数。")
    p.add_argument('n', type=_decimal)

    p = sub.add_parser('convergents', parents=[common], help="列出收敛子 p_m/q_m。")
    p.add_argument('n', type=_decimal)
    p.add_argument('--count', type=int, default=10, help="收敛子个数，从 m = −1 开始 (默认: 10)。")

    p = sub.add_parser('sum2sq', parents=[common], help="τ 为奇数时把 N 写成两平方和。")
    p.add_argument('n', type=_decimal)

    p = sub.add_parser('classify', parents=[common], help="预测周期奇偶性与中心项。")
    p.add_argument('n', type=_decimal)
    p.add_argument('--p', type=_decimal, default=None, help="已知素因子 p。")
    p.add_argument('--q', type=_decimal, default=None, help="已知素因子 q。")
    p.add_argument('--verify', action='store_true', help="展开半个周期，给出真实值对照。")

    p = sub.add_parser('cycle', parents=[common], help="列出主循环 𝚼 及累积距离。")
    p.add_argument('n', type=_decimal)

    p = sub.add_parser('regulator', parents=[common], help="遍历主循环计算 R⁺(N)。")
    p.add_argument('n', type=_decimal)

    p = sub.add_parser('factor', parents=[common], help="分解 N。")
    p.add_argument('n', type=_decimal)
    source = p.add_mutually_exclusive_group()
    source.add_argument('--regulator', type=str, default=None, help="外部给定的 R⁺(N)。")
    source.add_argument('--regulator-multiple', type=str, default=None, help="外部给定的 k·R⁺(N)，k 未知。")
    p.add_argument('--imax-override', type=int, default=None, help="覆盖算法 1 的 i_max。")

    p = sub.add_parser('bench', parents=[common], help="批量运行与验收套件。")
    p.add_argument('--suite', choices=SUITES, default='factor', help="套件名 (默认: factor)。")
    p.add_argument('--range', type=str, default="3..2000", help="N 的范围 A..B，两端包含 (默认: 3..2000)。")
    p.add_argument('--class', dest='klass', choices=CLASSES, default='all', help="factor 套件的类别过滤。")
    p.add_argument('--workers', type=int, default=None, help="并行进程数。")
    p.add_argument('--count', type=int, default=100, help="multiples 套件的样本数 (默认: 100)。")
    p.add_argument('--bits', type=int, default=32, help="multiples 套件的位数上限 (默认: 32)。")
    p.add_argument('--max-bits', type=int, default=40, help="scaling 套件的最大位数 (默认: 40)。")
    p.add_argument('--two-primes-only', action='store_true', help="stat 套件只统计 pq 型 N。")
    p.add_argument('--seed', type=int, default=None, help="随机样本的种子。")
    return parser


# --- 各子命令：返回 (退出码, outcome, trace, 文本行) ---

def _cmd_expand(args, settings):
    exp = expand_sqrt(args.n, settings.step_cap)
    outcome = {"a0": str(exp.a0), "period": [str(a) for a in exp.period_quotients], "tau": exp.tau}
    shown = ", ".join(outcome["period"])
    return EXIT_OK, outcome, None, [f"√{exp.n} = [{exp.a0}; {shown}]", f"τ = {exp.tau}"]


def _cmd_convergents(args, settings):
    validate_radicand(args.n)
    rows = [{"m": c.index, "p": str(c.p), "q": str(c.q), "norm": str(c.norm(args.n))}
            for c in convergents(args.n, args.count)]
    lines = [f"  m = {r['m']:>3}: p = {r['p']}, q = {r['q']}, p² − Nq² = {r['norm']}" for r in rows]
    return EXIT_OK, {"convergents": rows}, None, lines


def _cmd_sum2sq(args, settings):
    a, b = sum_two_squares(args.n, settings.step_cap)
    return EXIT_OK, {"a": str(a), "b": str(b)}, None, [f"{args.n} = {a}² + {b}²"]


def _cmd_classify(args, settings):
    known = [f for f in (args.p, args.q) if f is not None] or None
    parity = predict_parity(args.n, known, settings)
    central = predict_central(args.n, known, settings)
    outcome = {"parity": parity.to_dict(), "central": central.to_dict()}
    lines = [f"周期奇偶性: {parity.verdict.value} (规则: {parity.rule})",
             f"中心项: {central.verdict.value} (规则: {central.rule})"]
    if args.verify:
        measured = measure_central(args.n, settings)
        outcome["measured"] = measured.to_dict()
        lines.append(f"实测: τ = {measured.tau} ({measured.parity.value})，中心项 {measured.central_q}，"
                     f"gcd = {measured.central_gcd}")
    return EXIT_OK, outcome, None, lines


def _cmd_cycle(args, settings):
    entries = walk_principal_cycle(args.n, settings)
    rows = [e.to_dict() for e in entries]
    lines = [f"  Υ_{e.index:<4} ({e.form.a}, {e.form.b}, {e.form.c})  δ = {format_real(e.dist)}"
             for e in entries[:-1]]
    closing = entries[-1]
    lines.append(f"主循环长度 {closing.index}，闭合时累积距离 {format_real(closing.dist)}")
    return EXIT_OK, {"forms": rows[:-1], "length": closing.index,
                     "total": format_real(closing.dist)}, None, lines


def _cmd_regulator(args, settings):
    value = regulator_traverse(args.n, settings, args.verbose)
    outcome = value.to_dict()
    outcome["hua_bound"] = format_real(hua_regulator_bound(args.n, settings))
    return EXIT_OK, outcome, None, [f"R⁺({args.n}) = {outcome['value']}",
                                    f"τ = {value.tau}，Hua 上界 {outcome['hua_bound']}"]


def _cmd_factor(args, settings):
    factorizer = RegulatorFactorizer(settings, args.verbose)
    regulator = None
    if args.regulator is not None:
        regulator = accept_external(args.n, args.regulator, exact=True, settings=settings)
    elif args.regulator_multiple is not None:
        regulator = accept_external(args.n, args.regulator_multiple, exact=False, settings=settings)
    result = factorizer.factor(args.n, regulator)
    data = result.to_dict()
    trace = data.pop("trace")
    if result.is_factor:
        lines = [f"{result.n} = {result.divisor} × {result.n // result.divisor}",
                 f"算法: {result.trace.algorithm}，R⁺ = {result.trace.regulator}"]
        code = EXIT_OK
    else:
        lines = [f"{result.n}: Inapplicable（算法 {result.trace.algorithm} 未找到因子）"]
        code = EXIT_INAPPLICABLE
    for note in result.trace.notes:
        lines.append(f"  注: {note}")
    return code, data, trace, lines


def _cmd_bench(args, settings):
    lo, hi = parse_range(args.range)
    summary = run_suite(args.suite, settings, lo=lo, hi=hi, klass=args.klass, count=args.count,
                        bits=args.bits, max_bits=args.max_bits, two_primes_only=args.two_primes_only,
                        progress=not args.json)
    data = summary.to_dict()
    lines = [f"--- 套件 {summary.suite}: {data['params']} ---",
             f"检查 {summary.checked} 项，失败 {len(summary.failures)} 项"]
    for key, value in summary.stats.items():
        lines.append(f"  {key}: {value}")
    for failure in data["failures"]:
        lines.append(f"  失败: {failure}")
    return (EXIT_OK if summary.passed else EXIT_ERROR), data, None, lines


_COMMANDS = {
    'expand': _cmd_expand,
    'convergents': _cmd_convergents,
    'sum2sq': _cmd_sum2sq,
    'classify': _cmd_classify,
    'cycle': _cmd_cycle,
    'regulator': _cmd_regulator,
    'factor': _cmd_factor,
    'bench': _cmd_bench,
}


def cli_dispatch(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    try:
        settings = load_settings(args.config).merged(
            precision_bits=args.precision_bits,
            step_cap=args.step_cap,
            imax_override=getattr(args, 'imax_override', None),
            workers=getattr(args, 'workers', None),
            seed=getattr(args, 'seed', None),
        )
        watch = Stopwatch()
        with watch.running():
            code, outcome, trace, lines = _COMMANDS[args.command](args, settings)
    except (ValueError, RuntimeError) as e:
        print(f"错误: {e}", file=sys.stderr)
        return EXIT_ERROR

    if args.json:
        n = str(args.n) if hasattr(args, 'n') else None
        report = RunReport(command=argv, n=n, outcome=outcome, trace=trace,
                           timing_ms=watch.elapsed_ms, config=settings.to_dict())
        print(report.to_json())
    else:
        for line in lines:
            print(line)
    return code
