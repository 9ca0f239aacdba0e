# regulator_factor_core/report.py
"""
一次命令运行的报告文档。所有大整数与实数都以十进制字符串保存，不出现浮点数。
"""
import json
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from typing import List, Optional

from .factorizer import FactorOutcome


@dataclass
class RunReport:
    command: List[str]
    n: Optional[str] = None
    outcome: dict = field(default_factory=dict)
    trace: Optional[dict] = None
    timing_ms: str = "0"
    config: dict = field(default_factory=dict)

    def factor_outcome(self) -> FactorOutcome:
        """从报告中还原 FactorOutcome。"""
        data = dict(self.outcome)
        data["trace"] = self.trace or {}
        return FactorOutcome.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)

    def without_timing(self) -> dict:
        data = self.to_dict()
        data.pop("timing_ms")
        return data

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=indent, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        data = json.loads(text)
        return cls(**data)


class Stopwatch:
    """记录墙钟耗时，结果为毫秒的十进制字符串。"""

    def __init__(self):
        self.elapsed_ms = "0"

    @contextmanager
    def running(self):
        start = time.perf_counter()
        try:
            yield self
        finally:
            self.elapsed_ms = f"{(time.perf_counter() - start) * 1000:.3f}"
