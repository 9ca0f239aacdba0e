# regulator_factor_core/__init__.py
from .cf_engine import expand_sqrt, sum_two_squares
from .factorizer import RegulatorFactorizer, factor
from .regulator import accept_external, regulator_traverse

# 这使得我们可以用 from regulator_factor_core import factor 这样更简洁的方式导入
