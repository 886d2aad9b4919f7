"""Exception hierarchy shared by every module of the package."""


class DimFGPError(Exception):
    """Base class for all errors raised by dimfgp."""


class NonPositiveCap(DimFGPError, ValueError):
    pass


class EmptyDay(DimFGPError, ValueError):
    pass


class DimensionMismatch(DimFGPError, ValueError):
    pass


class BadParameter(DimFGPError, ValueError):
    pass


class DegenerateConfig(DimFGPError, ValueError):
    pass


class MalformedRow(DimFGPError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DuplicateStockDay(MalformedRow):
    pass


class RankOnlyFamily(DimFGPError, ValueError):
    pass


class NonPositiveG(DimFGPError, ArithmeticError):
    pass


class TotalLoss(DimFGPError, ArithmeticError):
    """Wealth hit zero (or below) after applying delisting returns."""


class FamilyNotOpenMarketAdmissible(DimFGPError, ValueError):
    pass


class OutsideDomain(DimFGPError, ValueError):
    """A generating function was evaluated at a point with a non-positive weight."""
