from typing import Optional


class SamplerError(Exception):
    """Базовая ошибка движка выборки"""


class GraphValidationError(SamplerError, ValueError):
    """Граф или назначение нарушают инварианты (петли, дубликаты, несвязность)"""


class EmptyDistrictError(SamplerError, ValueError):
    def __init__(self, district: int, node: Optional[int] = None):
        self.district = district
        self.node = node
        super().__init__(f"Move of node {node} would empty district {district}")


class EmptyBoundaryError(SamplerError, ValueError):
    """У разбиения нет разрезанных ребер (k=1) - предложить нечего"""


class DisconnectedRegionError(SamplerError, ValueError):
    """Индуцированный подграф несвязен"""


class ProposalParameterError(SamplerError, ValueError):
    """Некорректный параметр предложения (например, слишком малое M)"""


class ChainStuckError(SamplerError, RuntimeError):
    def __init__(self, message: str, attempts: int = 0):
        self.attempts = attempts
        super().__init__(message)


class InfeasibleMergeError(SamplerError, RuntimeError):
    def __init__(self, districts, redraws: int):
        self.districts = tuple(districts)
        self.redraws = redraws
        super().__init__(
            f"No balanced cut found for districts {self.districts} after {redraws} tree draws"
        )


class SeedingError(SamplerError, RuntimeError):
    """Не удалось построить начальный план за отведенное число попыток"""


class OracleSizeError(SamplerError, ValueError):
    """Перебор оракула превышает защитный предел"""


class ZeroDenominatorError(SamplerError, ZeroDivisionError):
    def __init__(self, district: int, column: str):
        self.district = district
        self.column = column
        super().__init__(f"Column '{column}' sums to zero in district {district}")


class ChainRunError(SamplerError, RuntimeError):
    def __init__(self, step: int, cause: Exception):
        self.step = step
        self.cause = cause
        super().__init__(f"Chain aborted at step {step}: {cause}")
