# regulator_factor_core/config.py
import json
import os
import sys
from dataclasses import dataclass, fields, replace
from typing import Optional

CONFIG_FILE = "config.json"

# 距离计算的有效位数，不得低于 64 位
DEFAULT_PRECISION_BITS = 96
MIN_PRECISION_BITS = 64
DEFAULT_TRIAL_DIVISION_BOUND = 10**6
DEFAULT_REGULATOR_TOLERANCE = 1e-9
DEFAULT_CROSSCHECK_MAX_TAU = 50_000
DEFAULT_MAX_TRAVERSAL_BITS = 48
DEFAULT_MAX_HALVING_ROUNDS = 64
DEFAULT_SEED = 20240601

# Kraitchik 周期上界 0.72·√N·ln N（N > 7）
KRAITCHIK_CONSTANT = 0.72
# α = ∏_{j 奇}(1 − 2^{−j})
ALPHA_CONSTANT = 0.41942244117951

DISTANCE_SIGNIFICANT_DIGITS = 12


@dataclass(frozen=True)
class Settings:
    """运行参数。字段与 config.json 中的键一一对应，命令行参数可覆盖。"""
    precision_bits: int = DEFAULT_PRECISION_BITS
    trial_division_bound: int = DEFAULT_TRIAL_DIVISION_BOUND
    step_cap: Optional[int] = None
    regulator_tolerance: float = DEFAULT_REGULATOR_TOLERANCE
    crosscheck_max_tau: int = DEFAULT_CROSSCHECK_MAX_TAU
    max_traversal_bits: int = DEFAULT_MAX_TRAVERSAL_BITS
    imax_override: Optional[int] = None
    max_halving_rounds: int = DEFAULT_MAX_HALVING_ROUNDS
    seed: int = DEFAULT_SEED
    workers: int = 1

    def __post_init__(self):
        if self.precision_bits < MIN_PRECISION_BITS:
            raise ValueError(f"precision_bits 至少为 {MIN_PRECISION_BITS}，收到 {self.precision_bits}。")
        if self.trial_division_bound < 2:
            raise ValueError("trial_division_bound 必须不小于 2。")
        if self.regulator_tolerance <= 0:
            raise ValueError("regulator_tolerance 必须为正数。")
        if self.workers < 1:
            raise ValueError("workers 必须为正整数。")

    def merged(self, **overrides) -> "Settings":
        """返回一个新的 Settings，忽略值为 None 的覆盖项。"""
        changes = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **changes) if changes else self

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def load_settings(config_file: str = CONFIG_FILE) -> Settings:
    """
    从 config.json 读取运行参数。
    文件不存在时返回默认值；文件格式错误时打印警告并返回默认值。
    """
    if not config_file or not os.path.exists(config_file):
        return Settings()

    try:
        with open(config_file, 'r', encoding='utf-8') as f:
            config_data = json.load(f)
    except (IOError, json.JSONDecodeError) as e:
        print(f"警告: {config_file} 文件格式错误，将使用默认参数。错误: {e}", file=sys.stderr)
        return Settings()

    if not isinstance(config_data, dict):
        print(f"警告: {config_file} 顶层必须是对象，将使用默认参数。", file=sys.stderr)
        return Settings()

    known = {f.name for f in fields(Settings)}
    unknown = sorted(set(config_data) - known)
    if unknown:
        print(f"警告: {config_file} 中存在未知的键 {unknown}，已忽略。", file=sys.stderr)

    return Settings(**{k: v for k, v in config_data.items() if k in known})
