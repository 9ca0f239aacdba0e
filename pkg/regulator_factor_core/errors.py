# regulator_factor_core/errors.py
"""
工具包的异常层级。

输入类错误同时继承 ValueError，内部错误同时继承 RuntimeError，
入口脚本因此可以沿用 `except (ValueError, RuntimeError)` 的写法。
"""


class FactorToolkitError(Exception):
    """所有工具包异常的基类。"""


# --- 输入错误 ---

class InvalidInputError(FactorToolkitError, ValueError):
    """输入不满足基本前提（例如 N ≤ 1）。"""


class SquareInputError(InvalidInputError):
    def __init__(self, n):
        super().__init__(f"输入 {n} 是完全平方数 (perfect square)。")
        self.n = n


class EvenInputError(InvalidInputError):
    def __init__(self, n):
        super().__init__(f"输入 {n} 是偶数 (even input)，本方法只处理奇数。")
        self.n = n


class ProbablePrimeError(InvalidInputError):
    def __init__(self, n):
        super().__init__(f"输入 {n} 是概率素数 (probable prime)，无需分解。")
        self.n = n


class DegenerateFormError(InvalidInputError):
    """二次型系数为零或判别式不合法。"""


class DiscriminantMismatchError(InvalidInputError):
    """两个二次型的判别式不同。"""


class PreconditionError(InvalidInputError):
    """符号计算等操作的前提条件不成立。"""


class RegulatorInputError(InvalidInputError):
    """外部提供的调节子数值不合法。"""


class OutOfEnvelopeError(InvalidInputError):
    """输入超出遍历法可处理的规模，需要外部调节子。"""


# --- 运行期错误 ---

class StepCapExceededError(FactorToolkitError, RuntimeError):
    def __init__(self, n, step_cap):
        super().__init__(f"√{n} 的连分数在 {step_cap} 步内未闭合 (cap exceeded)。")
        self.n = n
        self.step_cap = step_cap


class CycleTooShortError(FactorToolkitError, RuntimeError):
    """主循环在达到基准距离之前就已闭合，应改用算法 1。"""


class RegulatorMismatchError(FactorToolkitError, RuntimeError):
    """遍历求和与收敛子对数不一致，通常意味着精度问题。"""


class DistanceBoundError(FactorToolkitError, RuntimeError):
    """距离修正量或步数超出理论界。"""


class SoundnessError(FactorToolkitError, RuntimeError):
    """返回的因子不整除 N，属于内部错误。"""


class SamplingExhaustedError(FactorToolkitError, RuntimeError):
    """批量运行在抽样上限内没有找到满足条件的 N。"""


class EvenPeriodError(InvalidInputError):
    """周期为偶数，无法给出两平方和表示。"""
